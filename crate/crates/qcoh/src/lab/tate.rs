//! Ext, Tate cohomology, Gorenstein relative Ext and the long exact sequence
//! relating them.

use std::collections::HashSet;

use serde::Serialize;

use super::module::{length, minimal_generators, span, FinModule, Power, RMat};
use super::resolution::{complete_resolution, presentation_resolution, proj_resolution, FreeComplex};
use super::{LabError, Result};

/// Length of `Ext^i(M, N)`, from the minimal free resolution of `M`.
pub fn ext_dim(m: &FinModule, n: &FinModule, i: usize) -> Result<usize> {
    proj_resolution(m, i + 1)?.complex.hom_cohomology(n, i as i64)
}

/// Length of `Gext^i(M, N)`. Over a self-injective ring every module is
/// Gorenstein projective, so the relative resolution is `M` itself.
pub fn gext_dim(m: &FinModule, n: &FinModule, i: usize) -> Result<usize> {
    if !m.ring().is_self_injective() {
        return Err(LabError::Unsupported(format!("Gext over {}, which is not self-injective", m.ring())));
    }
    if i == 0 {
        ext_dim(m, n, 0)
    } else {
        Ok(0)
    }
}

/// `(i, length of Êxt^i(M, N))` for every `i` in a range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TateTable {
    pub entries: Vec<(i64, usize)>,
}

/// Tate cohomology on `[lo, hi]` from one complete resolution of `M`.
pub fn tate_table(m: &FinModule, n: &FinModule, lo: i64, hi: i64) -> Result<TateTable> {
    let t = complete_resolution(m, lo - 1, hi + 1)?;
    let entries = (lo..=hi).map(|i| Ok((i, t.complex.hom_cohomology(n, i)?))).collect::<Result<_>>()?;
    Ok(TateTable { entries })
}

/// Length of `Êxt^i(M, N) = H^i(Hom(T, N))` with `T` a complete resolution of `M`.
pub fn tate_ext_dim(m: &FinModule, n: &FinModule, i: i64) -> Result<usize> {
    Ok(tate_table(m, n, i, i)?.entries[0].1)
}

/// `B ∘ ψ` for `ψ ∈ Hom(M, R^cols)` stored as `cols` blocks of `g` generator images.
fn compose_free(m: &FinModule, b: &RMat, psi: &[u32]) -> Vec<u32> {
    let ring = m.ring();
    let g = m.gens();
    let mut out = vec![0u32; b.rows() * g];
    for c in 0..b.rows() {
        for a in 0..b.cols() {
            let coef = b.get(c, a);
            if coef == 0 {
                continue;
            }
            for i in 0..g {
                let x = ring.mul(coef, psi[a * g + i] as u8);
                out[c * g + i] = ring.add(out[c * g + i] as u8, x) as u32;
            }
        }
    }
    out
}

/// `H^p(Hom(M, E))` where `E^p = T_{-1-p}` is the injective side read off a
/// complete resolution of `N`.
fn injective_side(m: &FinModule, t: &FreeComplex, p: i64) -> Result<usize> {
    let ring = m.ring();
    let g = m.gens();
    let homs = m.homs(&FinModule::free(ring, 1)?)?;
    let hgens = minimal_generators(&Power::free(ring, g), &homs);
    let rank = |p: i64| t.rank(-1 - p);
    let k = rank(p);
    let carrier = Power::free(ring, k * g);
    // all of Hom(M, R^k) as products of elements of Hom(M, R)
    let mut cochains: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..k {
        cochains = cochains
            .into_iter()
            .flat_map(|pre| {
                homs.iter().map(move |h| {
                    let mut v = pre.clone();
                    v.extend(h);
                    v
                })
            })
            .collect();
    }
    let out = t.diff(-1 - p);
    let z: Vec<Vec<u32>> = cochains.into_iter().filter(|x| compose_free(m, &out, x).iter().all(|&c| c == 0)).collect();
    let inc = t.diff(-p);
    let kprev = rank(p - 1);
    let gens: Vec<Vec<u32>> = (0..kprev)
        .flat_map(|a| {
            hgens.iter().map(move |h| {
                let mut v = vec![0u32; kprev * g];
                v[a * g..(a + 1) * g].copy_from_slice(h);
                v
            })
        })
        .map(|v| compose_free(m, &inc, &v))
        .collect();
    let b = span(&carrier, &gens);
    Ok(length(&carrier, &z) - length(&carrier, &b))
}

/// Length of `Êxt^i(M, N)` computed as `H^i(Hom(M, E))` with `E` a complete
/// injective resolution of `N`.
pub fn tate_ext_dim_injective(m: &FinModule, n: &FinModule, i: i64) -> Result<usize> {
    let t = complete_resolution(n, -2 - i, -i)?;
    injective_side(m, &t.complex, i)
}

/// One degree of the sequence `Gext^i → Ext^i → Êxt^i → Gext^{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AmRow {
    pub degree: usize,
    pub gext: usize,
    pub ext: usize,
    pub tate: usize,
    pub map_injective: bool,
    pub map_surjective: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AmReport {
    pub module: String,
    pub against: String,
    pub rows: Vec<AmRow>,
    /// Alternating sum of lengths along the sequence vanishes.
    pub lengths_consistent: bool,
    /// Exact at every term, checked on the maps.
    pub exact: bool,
}

/// Lifts `id_M` to a chain map `T_{≥0} → P`; returns `ϑ_0, …, ϑ_top`.
fn comparison(
    m: &FinModule,
    t: &FreeComplex,
    t_aug: &[u32],
    p: &FreeComplex,
    top: usize,
) -> Result<Vec<RMat>> {
    let ring = p.ring().clone();
    let r = FinModule::free(&ring, 1)?;
    let cols: Vec<Vec<u8>> = t_aug.iter().map(|&a| m.vector(a)).collect();
    let mut maps = vec![RMat::from_cols(p.rank(0), &cols)];
    for i in 1..=top as i64 {
        let dp = p.diff(i);
        let mut preimage = std::collections::HashMap::new();
        for y in Power::free(&ring, p.rank(i)).all()? {
            preimage.entry(dp.apply(&r, &y)).or_insert(y);
        }
        let want = maps[i as usize - 1].mul(&ring, &t.diff(i));
        let mut cols = Vec::new();
        for b in 0..want.cols() {
            let target: Vec<u32> = want.column(b).into_iter().map(u32::from).collect();
            let y = preimage
                .get(&target)
                .ok_or_else(|| LabError::Certificate(format!("comparison map does not lift in degree {i}")))?;
            cols.push(y.iter().map(|&x| x as u8).collect());
        }
        maps.push(RMat::from_cols(p.rank(i), &cols));
    }
    Ok(maps)
}

/// Checks `0 → Gext^1 → Ext^1 → Êxt^1 → Gext^2 → ⋯ → Ext^n → Êxt^n → 0`
/// term by term. `Ext` comes from the given presentation of `M`, `Êxt` from
/// a complete resolution by minimal covers, and `Ext → Êxt` is induced by a
/// lifted comparison map.
pub fn am_sequence_check(m: &FinModule, n: &FinModule, n_max: usize) -> Result<AmReport> {
    let p = presentation_resolution(m, n_max + 1)?;
    let t = complete_resolution(m, -1, n_max as i64 + 1)?;
    let theta = comparison(m, &t.complex, &t.aug, &p.complex, n_max)?;
    let mut rows = Vec::new();
    for i in 1..=n_max {
        let ii = i as i64;
        let (pc, tc) = (&p.complex, &t.complex);
        let pz = pc.cocycles(n, ii)?;
        let pb = pc.coboundaries(n, ii);
        let tz = tc.cocycles(n, ii)?;
        let tb = tc.coboundaries(n, ii);
        let pcar = Power::new(n, pc.rank(ii));
        let tcar = Power::new(n, tc.rank(ii));
        let pull: Vec<Vec<u32>> = pz.iter().map(|z| theta[i].apply_transpose(n, z)).collect();
        let tzset: HashSet<&Vec<u32>> = tz.iter().collect();
        if !pull.iter().all(|x| tzset.contains(x)) {
            return Err(LabError::Certificate(format!("comparison map is not a chain map in degree {i}")));
        }
        let tbset: HashSet<&Vec<u32>> = tb.iter().collect();
        let dying = pull.iter().filter(|x| tbset.contains(x)).count();
        let map_injective = dying == pb.len();
        let mut gens = pull.clone();
        gens.extend(tb.iter().cloned());
        let map_surjective = span(&tcar, &gens).len() == tz.len();
        rows.push(AmRow {
            degree: i,
            gext: gext_dim(m, n, i)?,
            ext: length(&pcar, &pz) - length(&pcar, &pb),
            tate: length(&tcar, &tz) - length(&tcar, &tb),
            map_injective,
            map_surjective,
        });
    }
    let alt: i64 = rows.iter().map(|r| r.gext as i64 - r.ext as i64 + r.tate as i64).sum();
    let exact = rows.iter().all(|r| r.gext == 0 && r.map_injective && r.map_surjective);
    Ok(AmReport {
        module: m.describe(),
        against: n.describe(),
        rows,
        lengths_consistent: alt == 0,
        exact,
    })
}
