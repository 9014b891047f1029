//! Čech complexes over the standard cover and sheaf cohomology of presented
//! sheaves, including Ext between twisting sheaves.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{Complex, Matrix};
use crate::quiver::{vertices_of_size, QuiverError, Result, Slice, SliceKey, TwistPresentation, Vertex};
use crate::scalar::Field;

/// `C^p = ⊕_{|v|=p+1} M(v)`, stored one slice at a time. Slices whose terms
/// all vanish are dropped.
#[derive(Clone, Debug)]
pub struct CechComplex<F> {
    pub n: usize,
    pub window: usize,
    /// Vertices indexing the summands of `C^p`, in canonical order.
    pub terms: Vec<Vec<Vertex>>,
    pub slices: Vec<(SliceKey, Complex<F>)>,
}

impl<F: Field> CechComplex<F> {
    /// Total dimension of `C^p` over all stored slices.
    pub fn term_dim(&self, p: usize) -> usize {
        self.slices.iter().map(|(_, c)| c.dim(p as i64)).sum()
    }

    pub fn cohomology(&self) -> Result<Vec<usize>> {
        let per: Vec<Vec<usize>> = self
            .slices
            .par_iter()
            .map(|(_, c)| (0..=self.n).map(|i| c.cohomology_dim(i as i64)).collect::<std::result::Result<Vec<_>, _>>())
            .collect::<std::result::Result<_, _>>()?;
        let mut h = vec![0; self.n + 1];
        for row in per {
            for (a, b) in h.iter_mut().zip(row) {
                *a += b;
            }
        }
        Ok(h)
    }
}

/// Position of the element of `big` missing from `small`.
fn removed_position(small: &Vertex, big: &Vertex) -> usize {
    let extra = (big.mask() & !small.mask()).trailing_zeros() as usize;
    big.members().iter().position(|&i| i == extra).expect("member")
}

fn slice_complex<F: Field>(
    p: &TwistPresentation<F>,
    terms: &[Vec<Vertex>],
    key: &SliceKey,
    w: usize,
) -> Result<Option<Complex<F>>> {
    let slices: Vec<Vec<Slice<F>>> = terms
        .iter()
        .map(|vs| vs.iter().map(|v| p.slice(v, key, w)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let dims: Vec<usize> = slices.iter().map(|s| s.iter().map(|x| x.dim()).sum()).collect();
    if dims.iter().all(|&d| d == 0) {
        return Ok(None);
    }
    let mut diffs = Vec::with_capacity(terms.len().saturating_sub(1));
    for q in 0..terms.len().saturating_sub(1) {
        let mut d = Matrix::zeros(dims[q + 1], dims[q]);
        let mut row0 = 0;
        for (wi, big) in terms[q + 1].iter().enumerate() {
            let to = &slices[q + 1][wi];
            let mut col0 = 0;
            for (ui, small) in terms[q].iter().enumerate() {
                let from = &slices[q][ui];
                if small.is_subset(big) && from.dim() > 0 && to.dim() > 0 {
                    let r = from.restrict_to(to)?;
                    let neg = removed_position(small, big) % 2 == 1;
                    for a in 0..r.rows() {
                        for b in 0..r.cols() {
                            let x = r.get(a, b).clone();
                            d.set(row0 + a, col0 + b, if neg { -x } else { x });
                        }
                    }
                }
                col0 += from.dim();
            }
            row0 += to.dim();
        }
        diffs.push(d);
    }
    let c = Complex::new(0, dims, diffs)?;
    c.verify()?;
    Ok(Some(c))
}

/// Čech complex of the standard cover, one complex per reported slice.
pub fn build_cech<F: Field>(p: &TwistPresentation<F>, w: usize) -> Result<CechComplex<F>> {
    if p.chart().is_some() {
        return Err(QuiverError::Unsupported("Čech complex of a chart module".into()));
    }
    let need = p.entry_reach();
    if need > w {
        return Err(QuiverError::WindowTooSmall { window: w, needed: need });
    }
    let n = p.n();
    let terms: Vec<Vec<Vertex>> = (1..=n + 1).map(|k| vertices_of_size(n, k)).collect();
    let keys = p.window_keys(w);
    let built: Vec<Option<(SliceKey, Complex<F>)>> = keys
        .par_iter()
        .map(|k| Ok(slice_complex(p, &terms, k, w)?.map(|c| (k.clone(), c))))
        .collect::<Result<_>>()?;
    Ok(CechComplex { n, window: w, terms, slices: built.into_iter().flatten().collect() })
}

/// `dim H^i` of the presented sheaf, summed over reported slices.
pub fn sheaf_cohomology_dim<F: Field>(p: &TwistPresentation<F>, i: usize, w: usize) -> Result<usize> {
    if i > p.n() {
        return Err(QuiverError::OutOfRange { index: i, max: p.n() });
    }
    Ok(build_cech(p, w)?.cohomology()?[i])
}

/// One row of a cohomology table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyReport {
    pub n: usize,
    /// Twist, when the sheaf is `O(d)`.
    pub d: Option<i64>,
    pub h: Vec<usize>,
    pub window: usize,
    /// The same dimensions come out with the window widened by 2.
    pub stabilized: bool,
}

/// All `h^i` at window `w`, compared against window `w + 2`.
pub fn cohomology_report<F: Field>(p: &TwistPresentation<F>, w: usize) -> Result<CohomologyReport> {
    let h = build_cech(p, w)?.cohomology()?;
    let wider = build_cech(p, w + 2)?.cohomology()?;
    let d = (p.sources().is_empty() && p.targets().len() == 1).then(|| p.targets()[0]);
    Ok(CohomologyReport { n: p.n(), d, stabilized: h == wider, h, window: w })
}

/// `dim Ext^i(O(a), O(b)) = h^i(O(b - a))` on `P^n`.
pub fn ext_twists<F: Field>(a: i64, b: i64, i: usize, n: usize, w: usize) -> Result<usize> {
    sheaf_cohomology_dim(&TwistPresentation::<F>::twist(n, b - a), i, w)
}

/// `h^i(P^n, O(d))` for every `d` in the range.
pub fn cohomology_table<F: Field>(n: usize, d_range: RangeInclusive<i64>, w: usize) -> Result<Vec<CohomologyReport>> {
    let reach = d_range.clone().map(|d| d.unsigned_abs() as usize).max().unwrap_or(0);
    if w < reach + n {
        return Err(QuiverError::WindowTooSmall { window: w, needed: reach + n });
    }
    d_range.map(|d| cohomology_report(&TwistPresentation::<F>::twist(n, d), w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::{vertices, MultiDegree, Term};
    use crate::scalar::Fp;
    use num_rational::BigRational;

    type Q = BigRational;

    fn binom(n: i64, k: i64) -> usize {
        if k < 0 || n < k {
            return 0;
        }
        (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) as usize
    }

    #[test]
    fn cech_terms_on_p1() {
        let c = build_cech(&TwistPresentation::<Q>::twist(1, 0), 2).unwrap();
        let names: Vec<Vec<String>> =
            c.terms.iter().map(|t| t.iter().map(|v| v.to_string()).collect()).collect();
        assert_eq!(names, vec![vec!["{0}", "{1}"], vec!["{0,1}"]]);
    }

    #[test]
    fn cech_on_p0_is_one_term() {
        let c = build_cech(&TwistPresentation::<Q>::twist(0, 0), 1).unwrap();
        assert_eq!(c.terms.len(), 1);
        assert_eq!(c.cohomology().unwrap(), vec![1]);
    }

    #[test]
    fn cech_term_sizes_on_p2() {
        let c = build_cech(&TwistPresentation::<Q>::twist(2, 0), 0).unwrap();
        let sizes: Vec<usize> = c.terms.iter().map(|t| t.len()).collect();
        assert_eq!(sizes, vec![3, 3, 1]);
        // window 0 leaves only the constant monomial on every chart
        assert_eq!((0..3).map(|p| c.term_dim(p)).collect::<Vec<_>>(), vec![3, 3, 1]);
    }

    #[test]
    fn twist_cohomology_examples() {
        assert_eq!(sheaf_cohomology_dim(&TwistPresentation::<Q>::twist(1, 2), 0, 4).unwrap(), 3);
        assert_eq!(sheaf_cohomology_dim(&TwistPresentation::<Q>::twist(1, -2), 1, 4).unwrap(), 1);
        assert_eq!(sheaf_cohomology_dim(&TwistPresentation::<Q>::twist(1, -1), 1, 4).unwrap(), 0);
        assert!(matches!(
            sheaf_cohomology_dim(&TwistPresentation::<Q>::twist(1, 0), 2, 4),
            Err(QuiverError::OutOfRange { .. })
        ));
    }

    #[test]
    fn ext_twists_examples() {
        assert_eq!(ext_twists::<Q>(0, -2, 1, 1, 4).unwrap(), 1);
        assert_eq!(ext_twists::<Q>(0, -3, 2, 2, 5).unwrap(), 1);
        for n in 0..3 {
            assert_eq!(ext_twists::<Q>(0, 0, 0, n, n + 2).unwrap(), 1);
        }
        // Ext^0(O(a), O(b)) counts polynomials of degree b - a
        assert_eq!(ext_twists::<Fp<3>>(1, 3, 0, 2, 5).unwrap(), binom(4, 2));
    }

    #[test]
    fn table_examples() {
        let t = cohomology_table::<Q>(2, 3..=3, 5).unwrap();
        assert_eq!(t[0].h, vec![10, 0, 0]);
        let t = cohomology_table::<Q>(2, -4..=-4, 6).unwrap();
        assert_eq!(t[0].h, vec![0, 0, 3]);
        let t = cohomology_table::<Q>(3, 0..=0, 3).unwrap();
        assert_eq!(t[0].h, vec![1, 0, 0, 0]);
        assert!(t[0].stabilized);
        assert!(cohomology_table::<Q>(2, -4..=4, 5).is_err());
    }

    #[test]
    fn multidegree_rule_per_slice() {
        // each slice contributes to h^0 iff no negative exponent and to h^n iff all negative
        let n = 2;
        for d in -5..=3 {
            let c = build_cech(&TwistPresentation::<Fp<5>>::twist(n, d), 6).unwrap();
            for (key, cx) in &c.slices {
                let a = key.degree().unwrap();
                let neg = a.neg_set();
                let want0 = usize::from(neg.is_empty());
                let wantn = usize::from(neg.len() == n + 1);
                assert_eq!(cx.cohomology_dim(0).unwrap(), want0, "{a}");
                assert_eq!(cx.cohomology_dim(n as i64).unwrap(), wantn, "{a}");
                assert_eq!(cx.cohomology_dim(1).unwrap(), 0, "{a}");
            }
        }
    }

    #[test]
    fn serre_duality_and_euler_characteristic() {
        for n in 1..=2 {
            for d in -4i64..=3 {
                let w = 8;
                let h0 = sheaf_cohomology_dim(&TwistPresentation::<Q>::twist(n, d), 0, w).unwrap();
                let hn = sheaf_cohomology_dim(&TwistPresentation::<Q>::twist(n, -d - n as i64 - 1), n, w).unwrap();
                assert_eq!(h0, hn);
            }
        }
        for d in -5i64..=5 {
            let h = cohomology_report(&TwistPresentation::<Q>::twist(1, d), 8).unwrap().h;
            assert_eq!(h[0] as i64 - h[1] as i64, d + 1);
        }
    }

    #[test]
    fn skyscraper_cohomology() {
        let t = Term { coef: Q::from_i64(1), exp: MultiDegree(vec![0, 1]) };
        let p = TwistPresentation::new(1, vec![0], vec![-1], vec![vec![vec![t]]], None).unwrap();
        let r = cohomology_report(&p, 3).unwrap();
        assert_eq!(r.h, vec![1, 0]);
        assert!(r.stabilized);
    }

    #[test]
    fn non_monomial_point_is_stable() {
        let terms = vec![
            Term { coef: Q::from_i64(1), exp: MultiDegree(vec![1, 0]) },
            Term { coef: Q::from_i64(1), exp: MultiDegree(vec![0, 1]) },
        ];
        let p = TwistPresentation::new(1, vec![0], vec![-1], vec![vec![terms]], None).unwrap();
        let r = cohomology_report(&p, 3).unwrap();
        assert_eq!(r.h, vec![1, 0]);
        assert!(r.stabilized);
        assert_eq!(vertices(1).len(), 3);
    }
}
