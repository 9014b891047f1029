//! Free resolutions and complete resolutions over finite rings.

use std::collections::HashSet;
use std::sync::Arc;

use super::module::{length, minimal_generators, span, FinModule, Power, RMat};
use super::ring::FiniteRing;
use super::{LabError, Result};

/// Bounded complex of free modules `T_i = R^{k_i}` with `d_i : T_i → T_{i-1}`,
/// homological indexing.
#[derive(Clone, Debug)]
pub struct FreeComplex {
    ring: Arc<FiniteRing>,
    lo: i64,
    ranks: Vec<usize>,
    /// `diffs[t]` is `d_{lo+1+t}`.
    diffs: Vec<RMat>,
}

impl FreeComplex {
    pub fn new(ring: &Arc<FiniteRing>, lo: i64, ranks: Vec<usize>, diffs: Vec<RMat>) -> Result<Self> {
        if diffs.len() + 1 != ranks.len() {
            return Err(LabError::Certificate("one differential per adjacent pair of terms".into()));
        }
        for (t, d) in diffs.iter().enumerate() {
            if d.rows() != ranks[t] || d.cols() != ranks[t + 1] {
                return Err(LabError::Certificate(format!("d_{} has the wrong shape", lo + 1 + t as i64)));
            }
        }
        Ok(FreeComplex { ring: ring.clone(), lo, ranks, diffs })
    }

    pub fn ring(&self) -> &Arc<FiniteRing> {
        &self.ring
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.ranks.len() as i64 - 1
    }

    pub fn rank(&self, i: i64) -> usize {
        if i < self.lo || i > self.hi() {
            0
        } else {
            self.ranks[(i - self.lo) as usize]
        }
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// `d_i`; the zero map outside the stored range.
    pub fn diff(&self, i: i64) -> RMat {
        if i <= self.lo || i > self.hi() {
            RMat::zeros(self.rank(i - 1), self.rank(i))
        } else {
            self.diffs[(i - self.lo - 1) as usize].clone()
        }
    }

    /// Exactness of `Q ⊗ T` at `i`, i.e. of `Hom(Q', T)` for `Q = Q'^*`;
    /// with `Q = R` this is exactness of `T`.
    pub fn exact_at_with(&self, q: &FinModule, i: i64) -> Result<bool> {
        let di = self.diff(i);
        let dnext = self.diff(i + 1);
        let here = Power::new(q, self.rank(i));
        let kernel: Vec<Vec<u32>> = here.all()?.into_iter().filter(|x| di.apply(q, x).iter().all(|&z| z == 0)).collect();
        let gens: Vec<Vec<u32>> = (0..self.rank(i + 1))
            .flat_map(|a| {
                (0..q.gens()).map(move |g| {
                    let mut v = vec![0u32; self.rank(i + 1)];
                    v[a] = q.generator(g);
                    v
                })
            })
            .map(|v| dnext.apply(q, &v))
            .collect();
        let image = span(&here, &gens);
        let kset: HashSet<&Vec<u32>> = kernel.iter().collect();
        Ok(image.iter().all(|x| kset.contains(x)) && image.len() == kernel.len())
    }

    pub fn exact_at(&self, i: i64) -> Result<bool> {
        self.exact_at_with(&FinModule::free(&self.ring, 1)?, i)
    }

    /// Cocycles of `Hom(T, N)` in degree `i`: `φ ∈ N^{k_i}` with `φ ∘ d_{i+1} = 0`.
    pub fn cocycles(&self, n: &FinModule, i: i64) -> Result<Vec<Vec<u32>>> {
        let d = self.diff(i + 1);
        Ok(Power::new(n, self.rank(i)).all()?.into_iter().filter(|x| d.apply_transpose(n, x).iter().all(|&z| z == 0)).collect())
    }

    /// Coboundaries of `Hom(T, N)` in degree `i`, sorted.
    pub fn coboundaries(&self, n: &FinModule, i: i64) -> Vec<Vec<u32>> {
        let d = self.diff(i);
        let prev = self.rank(i - 1);
        let gens: Vec<Vec<u32>> = (0..prev)
            .flat_map(|a| {
                (0..n.gens()).map(move |g| {
                    let mut v = vec![0u32; prev];
                    v[a] = n.generator(g);
                    v
                })
            })
            .map(|v| d.apply_transpose(n, &v))
            .collect();
        span(&Power::new(n, self.rank(i)), &gens)
    }

    /// Length of `H^i(Hom(T, N))`.
    pub fn hom_cohomology(&self, n: &FinModule, i: i64) -> Result<usize> {
        let p = Power::new(n, self.rank(i));
        let z = self.cocycles(n, i)?;
        let b = self.coboundaries(n, i);
        Ok(length(&p, &z) - length(&p, &b))
    }

    /// `coker(d_{i+1})`, isomorphic to the image of `d_i` when `T` is exact at `i`.
    pub fn syzygy(&self, i: i64) -> Result<FinModule> {
        let d = self.diff(i + 1);
        let cols: Vec<Vec<u8>> = (0..d.cols()).map(|j| d.column(j)).collect();
        FinModule::new(&self.ring, self.rank(i), cols)
    }
}

/// Kernel of `R^k → M`, `x ↦ Σ x_b m_b`.
fn kernel_to_module(m: &FinModule, images: &[u32]) -> Result<Vec<Vec<u32>>> {
    let free = Power::free(m.ring(), images.len());
    Ok(free
        .all()?
        .into_iter()
        .filter(|x| m.combine(&x.iter().map(|&c| c as u8).collect::<Vec<_>>(), images) == 0)
        .collect())
}

/// Kernel of `d : R^{cols} → R^{rows}`.
fn kernel_of(ring: &Arc<FiniteRing>, d: &RMat) -> Result<Vec<Vec<u32>>> {
    let r = FinModule::free(ring, 1)?;
    Ok(Power::free(ring, d.cols()).all()?.into_iter().filter(|x| d.apply(&r, x).iter().all(|&z| z == 0)).collect())
}

/// Matrix whose columns are minimal generators of a submodule of `R^rows`.
fn cover(ring: &Arc<FiniteRing>, rows: usize, sub: &[Vec<u32>]) -> RMat {
    let gens = minimal_generators(&Power::free(ring, rows), sub);
    let cols: Vec<Vec<u8>> = gens.iter().map(|g| g.iter().map(|&x| x as u8).collect()).collect();
    RMat::from_cols(rows, &cols)
}

/// `⋯ → P_1 → P_0 → M → 0`, stored up to `P_len`.
#[derive(Clone, Debug)]
pub struct Resolution {
    pub module: FinModule,
    pub complex: FreeComplex,
    /// Images in `M` of the basis of `P_0`.
    pub aug: Vec<u32>,
}

impl Resolution {
    fn build(m: &FinModule, aug: Vec<u32>, first: Option<RMat>, len: usize) -> Result<Self> {
        let ring = m.ring().clone();
        let mut ranks = vec![aug.len()];
        let mut diffs = Vec::new();
        for i in 1..=len {
            let d = match (&first, i) {
                (Some(f), 1) => f.clone(),
                _ => {
                    let kernel = if i == 1 { kernel_to_module(m, &aug)? } else { kernel_of(&ring, &diffs[i - 2])? };
                    cover(&ring, ranks[i - 1], &kernel)
                }
            };
            ranks.push(d.cols());
            diffs.push(d);
        }
        let res = Resolution { module: m.clone(), complex: FreeComplex::new(&ring, 0, ranks, diffs)?, aug };
        res.verify()?;
        Ok(res)
    }

    /// Surjective augmentation, exact at `P_0` and at every interior term.
    pub fn verify(&self) -> Result<()> {
        let m = &self.module;
        if span(m, &self.aug).len() != m.size() {
            return Err(LabError::Certificate("augmentation is not surjective".into()));
        }
        if self.complex.hi() == 0 {
            return Ok(());
        }
        let kernel = kernel_to_module(m, &self.aug)?;
        let d1 = self.complex.diff(1);
        let cols: Vec<Vec<u32>> = (0..d1.cols()).map(|j| d1.column(j).into_iter().map(u32::from).collect()).collect();
        let image = span(&Power::free(m.ring(), self.aug.len()), &cols);
        let kset: HashSet<&Vec<u32>> = kernel.iter().collect();
        if image.len() != kernel.len() || !image.iter().all(|x| kset.contains(x)) {
            return Err(LabError::Certificate("resolution is not exact at P_0".into()));
        }
        for i in 1..self.complex.hi() {
            if !self.complex.exact_at(i)? {
                return Err(LabError::Certificate(format!("resolution is not exact at P_{i}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.complex.hi() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.module.size() == 1
    }
}

/// Resolution by minimal free covers.
pub fn proj_resolution(m: &FinModule, len: usize) -> Result<Resolution> {
    let all: Vec<u32> = m.elements().collect();
    Resolution::build(m, minimal_generators(m, &all), None, len)
}

/// Resolution starting from the given presentation of `M`, then minimal covers.
pub fn presentation_resolution(m: &FinModule, len: usize) -> Result<Resolution> {
    let aug: Vec<u32> = (0..m.gens()).map(|i| m.generator(i)).collect();
    let first = (len > 0).then(|| RMat::from_cols(m.gens(), m.relations()));
    Resolution::build(m, aug, first, len)
}

/// `M → R^k` through generators of `Hom(M, R)`; returns the images of the
/// generators of `M`. Injective over self-injective rings.
fn preenvelope(m: &FinModule) -> Result<Vec<Vec<u8>>> {
    let ring = m.ring();
    let r = FinModule::free(ring, 1)?;
    let homs = m.homs(&r)?;
    let fs = minimal_generators(&Power::free(ring, m.gens()), &homs);
    let images: Vec<Vec<u8>> = (0..m.gens()).map(|i| fs.iter().map(|f| f[i] as u8).collect()).collect();
    let k = fs.len();
    for a in m.elements().skip(1) {
        let v = m.vector(a);
        let mut out = vec![0u8; k];
        for (i, &c) in v.iter().enumerate() {
            for (o, &x) in out.iter_mut().zip(&images[i]) {
                *o = ring.add(*o, ring.mul(c, x));
            }
        }
        if out.iter().all(|&x| x == 0) {
            return Err(LabError::Certificate(format!("{} does not embed in a free module", m.describe())));
        }
    }
    Ok(images)
}

/// Doubly unbounded exact complex of free modules through `M`, on a window.
#[derive(Clone, Debug)]
pub struct CompleteResolution {
    pub module: FinModule,
    pub complex: FreeComplex,
    /// Images in `M` of the basis of `T_0`.
    pub aug: Vec<u32>,
    /// Images in `T_{-1}` of the generators of `M`.
    pub coaug: Vec<Vec<u8>>,
    /// `(i, p)` with `Ω^i ≅ Ω^{i+p}`, the first repetition found in the window.
    pub period: Option<(i64, usize)>,
}

impl CompleteResolution {
    /// `Ω^i = coker(T_{i+1} → T_i)`, with `Ω^0 ≅ M`.
    pub fn syzygy(&self, i: i64) -> Result<FinModule> {
        self.complex.syzygy(i)
    }

    fn find_period(&mut self) -> Result<()> {
        let (lo, hi) = (self.complex.lo(), self.complex.hi());
        let syz: Vec<FinModule> = (lo..hi).map(|i| self.syzygy(i)).collect::<Result<_>>()?;
        for j in 1..syz.len() {
            for i in 0..j {
                if syz[i].is_isomorphic(&syz[j])? {
                    self.period = Some((lo + i as i64, j - i));
                    return Ok(());
                }
            }
        }
        Ok(())
    }

    /// Exact at every interior index, and `Hom(T, Q)` exact there for `Q = R`
    /// and `Q = eR` for every primitive idempotent `e`.
    pub fn verify(&self) -> Result<()> {
        let c = &self.complex;
        let ring = c.ring();
        let mut targets = vec![FinModule::free(ring, 1)?];
        if ring.primitive_idempotents().len() > 1 {
            for &(e, _) in ring.primitive_idempotents() {
                targets.push(FinModule::cyclic(ring, &[ring.sub(ring.one(), e)])?);
            }
        }
        for i in c.lo() + 1..c.hi() {
            if !c.exact_at(i)? {
                return Err(LabError::Certificate(format!("complete resolution is not exact at T_{i}")));
            }
            for q in &targets {
                if c.hom_cohomology(q, i)? != 0 {
                    return Err(LabError::Certificate(format!(
                        "Hom(T, {}) is not exact in degree {i}",
                        q.describe()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Complete resolution of `M` on a window containing `[lo, hi]` and `[-1, 0]`:
/// minimal free resolution on the left, iterated free preenvelopes on the right.
pub fn complete_resolution(m: &FinModule, lo: i64, hi: i64) -> Result<CompleteResolution> {
    let ring = m.ring().clone();
    if !ring.is_self_injective() {
        return Err(LabError::NotSelfInjective(ring.name().to_string()));
    }
    let (lo, hi) = (lo.min(-1), hi.max(0));
    let left = proj_resolution(m, hi as usize)?;
    // right half: T_{-1}, T_{-2}, ... with d_0 = ι ∘ aug
    let mut right_ranks = Vec::new();
    let mut right_diffs = Vec::new();
    let mut current = m.clone();
    let mut coaug = Vec::new();
    for p in 1..=(-lo) {
        let iota = preenvelope(&current)?;
        let k = iota.first().map_or(0, |v| v.len());
        let d = if p == 1 {
            coaug = iota.clone();
            let cols: Vec<Vec<u8>> = left
                .aug
                .iter()
                .map(|&a| {
                    let v = m.vector(a);
                    (0..k)
                        .map(|row| v.iter().enumerate().fold(0u8, |acc, (i, &c)| ring.add(acc, ring.mul(c, iota[i][row]))))
                        .collect()
                })
                .collect();
            RMat::from_cols(k, &cols)
        } else {
            RMat::from_cols(k, &iota)
        };
        right_ranks.push(k);
        right_diffs.push(d);
        current = FinModule::new(&ring, k, iota)?;
    }
    right_ranks.reverse();
    right_diffs.reverse();
    let mut ranks = right_ranks;
    ranks.extend(left.complex.ranks());
    let mut diffs = right_diffs;
    diffs.extend((1..=hi).map(|i| left.complex.diff(i)));
    let complex = FreeComplex::new(&ring, lo, ranks, diffs)?;
    let mut out = CompleteResolution { module: m.clone(), complex, aug: left.aug, coaug, period: None };
    out.verify()?;
    out.find_period()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::module::parse_module;

    fn ring(s: &str) -> Arc<FiniteRing> {
        Arc::new(FiniteRing::parse(s).unwrap())
    }

    #[test]
    fn resolution_of_residue_over_z4() {
        let r = ring("Zmod:4");
        let res = proj_resolution(&FinModule::residue(&r), 4).unwrap();
        assert_eq!(res.complex.ranks(), &[1, 1, 1, 1, 1]);
        for i in 1..=4 {
            assert_eq!(res.complex.diff(i).get(0, 0), 2);
        }
    }

    #[test]
    fn resolution_of_residue_over_dual_numbers() {
        let r = ring("GF:2:x^2");
        let x = r.parse_element("x").unwrap();
        let res = proj_resolution(&FinModule::residue(&r), 3).unwrap();
        assert_eq!(res.complex.ranks(), &[1, 1, 1, 1]);
        for i in 1..=3 {
            assert_eq!(res.complex.diff(i).get(0, 0), x);
        }
    }

    #[test]
    fn free_module_resolution_stops() {
        let r = ring("Zmod:4");
        let res = proj_resolution(&parse_module(&r, "R^2").unwrap(), 3).unwrap();
        assert_eq!(res.complex.ranks(), &[2, 0, 0, 0]);
    }

    #[test]
    fn presentation_resolution_keeps_given_cover() {
        let r = ring("Zmod:4");
        let m = parse_module(&r, "pres:2:2,0;0,1").unwrap();
        let res = presentation_resolution(&m, 3).unwrap();
        assert_eq!(res.complex.rank(0), 2);
        assert_eq!(res.complex.rank(1), 2);
        assert!(res.complex.exact_at(1).unwrap());
    }

    #[test]
    fn complete_resolutions_are_periodic() {
        let r = ring("Zmod:4");
        let t = complete_resolution(&FinModule::residue(&r), -4, 4).unwrap();
        assert!(t.complex.ranks().iter().all(|&k| k == 1));
        for i in t.complex.lo() + 1..=t.complex.hi() {
            assert_eq!(t.complex.diff(i).get(0, 0), 2, "d_{i}");
        }
        assert_eq!(t.period.map(|p| p.1), Some(1));

        let d = ring("GF:2:x^2");
        let t = complete_resolution(&FinModule::residue(&d), -3, 3).unwrap();
        let x = d.parse_element("x").unwrap();
        for i in t.complex.lo() + 1..=t.complex.hi() {
            assert_eq!(t.complex.diff(i).get(0, 0), x);
        }
    }

    #[test]
    fn complete_resolution_of_free_is_contractible() {
        let r = ring("Zmod:4");
        let m = FinModule::free(&r, 1).unwrap();
        let t = complete_resolution(&m, -3, 3).unwrap();
        let k = FinModule::residue(&r);
        for i in t.complex.lo() + 1..t.complex.hi() {
            assert_eq!(t.complex.hom_cohomology(&k, i).unwrap(), 0);
        }
    }

    #[test]
    fn complete_resolution_needs_self_injective_ring() {
        let r = Arc::new(crate::lab::ring::tests::square_zero_plane());
        let k = FinModule::residue(&r);
        assert!(matches!(complete_resolution(&k, -2, 2), Err(LabError::NotSelfInjective(_))));
    }

    #[test]
    fn non_local_ring() {
        let r = ring("Zmod:6");
        let m = parse_module(&r, "quot:2").unwrap();
        let t = complete_resolution(&m, -3, 3).unwrap();
        let n = parse_module(&r, "quot:3").unwrap();
        for i in -2..=2 {
            assert_eq!(t.complex.hom_cohomology(&m, i).unwrap(), 0);
            assert_eq!(t.complex.hom_cohomology(&n, i).unwrap(), 0);
        }
    }
}
