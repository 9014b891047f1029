//! Exhaustive checks over every small module of a finite ring.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::module::FinModule;
use super::resolution::{complete_resolution, proj_resolution, CompleteResolution, Resolution};
use super::ring::FiniteRing;
use super::tate::{ext_dim, gext_dim};
use super::{LabError, Result};

/// Largest number of raw presentations the enumeration will build.
pub const RAW_LIMIT: u128 = 1 << 16;

/// How far syzygies are searched for a projective or periodic one.
const SEARCH: usize = 6;
/// Degrees for the equivalent conditions: `Ext^i`, `i ∈ 1..=TOP`, and `Êxt^i`, `|i| ≤ TOP`.
const TOP: i64 = 5;

/// Isomorphism classes of modules with at most `max_gens` generators and
/// `max_rels` relations and at most `size_bound` elements.
#[derive(Clone, Debug)]
pub struct Universe {
    pub ring: Arc<FiniteRing>,
    pub max_gens: usize,
    pub max_rels: usize,
    pub size_bound: usize,
    pub presentations: usize,
    pub excluded: usize,
    pub modules: Vec<FinModule>,
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Non-decreasing sequences of length `r` from `0..n`.
fn multisets(n: u32, r: usize) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..r {
        out = out
            .into_iter()
            .flat_map(|pre| {
                let start = pre.last().copied().unwrap_or(0);
                (start..n).map(move |c| {
                    let mut v = pre.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

pub fn enumerate_universe(ring: &Arc<FiniteRing>, max_gens: usize, max_rels: usize, size_bound: usize) -> Result<Universe> {
    let q = ring.size() as u128;
    let mut count: u128 = 0;
    for g in 0..=max_gens {
        let vectors = q.checked_pow(g as u32).unwrap_or(u128::MAX);
        for r in 0..=max_rels {
            count = count.saturating_add(binomial(vectors.saturating_add(r as u128).saturating_sub(1), r as u128));
            if count > RAW_LIMIT {
                return Err(LabError::BoundExceeded { count, limit: RAW_LIMIT });
            }
        }
    }
    let mut classes: Vec<(Vec<usize>, FinModule)> = Vec::new();
    let mut presentations = 0;
    let mut excluded = 0;
    for g in 0..=max_gens {
        let vectors = (ring.size() as u32).pow(g as u32);
        for r in 0..=max_rels {
            for rows in multisets(vectors, r) {
                presentations += 1;
                let rels: Vec<Vec<u8>> = rows
                    .iter()
                    .map(|&code| {
                        let mut c = code as usize;
                        (0..g)
                            .map(|_| {
                                let x = (c % ring.size()) as u8;
                                c /= ring.size();
                                x
                            })
                            .collect()
                    })
                    .collect();
                let m = FinModule::new(ring, g, rels)?;
                if m.size() > size_bound {
                    excluded += 1;
                    continue;
                }
                let fp = m.fingerprint();
                let mut known = false;
                for (f, c) in &classes {
                    if *f == fp && c.is_isomorphic(&m)? {
                        known = true;
                        break;
                    }
                }
                if !known {
                    classes.push((fp, m));
                }
            }
        }
    }
    let mut modules: Vec<FinModule> = classes.into_iter().map(|(_, m)| m).collect();
    modules.sort_by_key(|m| m.size());
    Ok(Universe { ring: ring.clone(), max_gens, max_rels, size_bound, presentations, excluded, modules })
}

/// A homological dimension: a number, infinite with a periodicity
/// certificate, or undecided within the search depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    Finite(usize),
    Infinite,
    Unknown,
}

impl Dim {
    pub fn finite(self) -> Option<usize> {
        match self {
            Dim::Finite(d) => Some(d),
            _ => None,
        }
    }
}

impl Serialize for Dim {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dim::Finite(d) => s.serialize_u64(*d as u64),
            Dim::Infinite => s.serialize_str("inf"),
            Dim::Unknown => s.serialize_str("unknown"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModuleFacts {
    pub description: String,
    pub size: usize,
    pub projective: bool,
    pub injective: bool,
    pub pd: Dim,
    pub id: Dim,
    pub gorenstein_projective: bool,
    pub gorenstein_injective: bool,
    /// `(i, p)` with `Ω^i ≅ Ω^{i+p}` in the complete resolution.
    pub period: Option<(i64, usize)>,
}

/// `Ext^1(X, ΩX) = 0`, i.e. `0 → ΩX → P_0 → X → 0` splits.
fn is_projective(x: &FinModule) -> Result<bool> {
    let res = proj_resolution(x, 2)?;
    let omega = res.complex.syzygy(1)?;
    Ok(omega.size() == 1 || ext_dim(x, &omega, 1)? == 0)
}

/// Baer: `Ext^1(R/I, X) = 0` for every ideal `I`.
fn is_injective(x: &FinModule) -> Result<bool> {
    let ring = x.ring();
    for &i in ring.ideals() {
        let quotient = FinModule::cyclic(ring, &ring.ideal_elements(i))?;
        if ext_dim(&quotient, x, 1)? != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First `d` with `test(Ω^d)`; infinite when two non-passing syzygies repeat.
fn dimension(syz: &[FinModule], test: fn(&FinModule) -> Result<bool>) -> Result<Dim> {
    for (d, s) in syz.iter().enumerate() {
        if test(s)? {
            return Ok(Dim::Finite(d));
        }
    }
    for j in 1..syz.len() {
        for i in 0..j {
            if syz[i].is_isomorphic(&syz[j])? {
                return Ok(Dim::Infinite);
            }
        }
    }
    Ok(Dim::Unknown)
}

fn gorenstein_injective(t: &CompleteResolution) -> Result<bool> {
    let c = &t.complex;
    let ring = c.ring();
    for &(e, _) in ring.primitive_idempotents() {
        let er = FinModule::cyclic(ring, &[ring.sub(ring.one(), e)])?;
        for i in c.lo() + 1..c.hi() {
            if !c.exact_at_with(&er, i)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

struct Prepared {
    facts: ModuleFacts,
    res: Resolution,
    complete: Option<CompleteResolution>,
}

fn prepare(x: &FinModule) -> Result<Prepared> {
    let res = proj_resolution(x, SEARCH + 1)?;
    let syz: Vec<FinModule> = (0..=SEARCH as i64).map(|d| res.complex.syzygy(d)).collect::<Result<_>>()?;
    let pd = dimension(&syz, is_projective)?;
    let complete = match complete_resolution(x, -(SEARCH as i64) - 1, TOP + 1) {
        Ok(t) => Some(t),
        Err(LabError::Certificate(_)) => None,
        Err(e) => return Err(e),
    };
    let (id, gorenstein_injective, period) = match &complete {
        Some(t) => {
            let cosyz: Vec<FinModule> = (0..=SEARCH as i64).map(|p| t.syzygy(-p)).collect::<Result<_>>()?;
            (dimension(&cosyz, is_injective)?, gorenstein_injective(t)?, t.period)
        }
        None => (Dim::Unknown, false, None),
    };
    Ok(Prepared {
        facts: ModuleFacts {
            description: x.describe(),
            size: x.size(),
            projective: pd == Dim::Finite(0),
            injective: id == Dim::Finite(0),
            pd,
            id,
            gorenstein_projective: complete.is_some(),
            gorenstein_injective,
            period,
        },
        res,
        complete,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub index: usize,
    pub statement: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Predicates {
    pub self_injective: bool,
    pub local: bool,
    pub field: bool,
    pub all_gorenstein_projective: bool,
    pub all_gorenstein_injective: bool,
    /// Finite projective dimension iff finite injective dimension, module by module.
    pub finite_pd_iff_finite_id: bool,
    pub fpd: Option<usize>,
    pub fid: Option<usize>,
    pub gl_gpd: Option<usize>,
    pub gl_gid: Option<usize>,
    /// `FPD = FID = glGpd = glGid`.
    pub dimensions_agree: bool,
    pub conditions: Vec<Condition>,
    /// The eight conditions are all true or all false.
    pub conditions_coherent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub kind: String,
    pub module: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub against: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<i64>,
    pub value: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniverseSummary {
    pub max_generators: usize,
    pub max_relations: usize,
    pub size_bound: usize,
    pub presentations: usize,
    pub excluded: usize,
    pub classes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GorensteinReport {
    pub ring: String,
    pub universe: UniverseSummary,
    pub predicates: Predicates,
    pub witnesses: Vec<Witness>,
    pub modules: Vec<ModuleFacts>,
}

impl GorensteinReport {
    /// Every predicate the Gorenstein picture predicts over a self-injective ring.
    pub fn consistent(&self) -> bool {
        let p = &self.predicates;
        p.all_gorenstein_projective
            && p.all_gorenstein_injective
            && p.finite_pd_iff_finite_id
            && p.dimensions_agree
            && p.conditions_coherent
    }
}

/// Pairwise tables `ext[x][y][i-1]` for `i ∈ 1..=TOP`, `tate[x][y][i+TOP]` for `|i| ≤ TOP`.
type Tables = Vec<Vec<(Vec<usize>, Option<Vec<usize>>)>>;

fn pair_tables(mods: &[FinModule], prep: &[Prepared]) -> Result<Tables> {
    let pairs: Vec<(usize, usize)> = (0..mods.len()).flat_map(|x| (0..mods.len()).map(move |y| (x, y))).collect();
    let cells: Vec<(Vec<usize>, Option<Vec<usize>>)> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let n = &mods[y];
            let ext = (1..=TOP).map(|i| prep[x].res.complex.hom_cohomology(n, i)).collect::<Result<_>>()?;
            let tate = match &prep[x].complete {
                Some(t) => Some((-TOP..=TOP).map(|i| t.complex.hom_cohomology(n, i)).collect::<Result<_>>()?),
                None => None,
            };
            Ok((ext, tate))
        })
        .collect::<Result<_>>()?;
    Ok(cells.chunks(mods.len().max(1)).map(|c| c.to_vec()).collect())
}

/// Records the first pair with a nonzero value; true when there is none.
fn pair_witness(
    mods: &[FinModule],
    witnesses: &mut Vec<Witness>,
    kind: &str,
    pick: &dyn Fn(usize, usize) -> Vec<(i64, usize)>,
) -> bool {
    for x in 0..mods.len() {
        for y in 0..mods.len() {
            if let Some(&(deg, v)) = pick(x, y).iter().find(|(_, v)| *v != 0) {
                witnesses.push(Witness {
                    kind: kind.into(),
                    module: mods[x].describe(),
                    against: Some(mods[y].describe()),
                    degree: Some(deg),
                    value: v,
                });
                return false;
            }
        }
    }
    true
}

/// Records the first module failing a property; true when there is none.
fn module_witness(facts: &[ModuleFacts], witnesses: &mut Vec<Witness>, kind: &str, bad: &dyn Fn(&ModuleFacts) -> bool) -> bool {
    match facts.iter().find(|f| bad(f)) {
        Some(f) => {
            witnesses.push(Witness { kind: kind.into(), module: f.description.clone(), against: None, degree: None, value: 0 });
            false
        }
        None => true,
    }
}

/// Builds the report for an enumerated universe.
pub fn report_for(universe: &Universe) -> Result<GorensteinReport> {
    let ring = &universe.ring;
    if !ring.is_self_injective() {
        return Err(LabError::NotSelfInjective(ring.name().to_string()));
    }
    let mods = &universe.modules;
    let prep: Vec<Prepared> = mods.par_iter().map(prepare).collect::<Result<_>>()?;
    let tables = pair_tables(mods, &prep)?;
    let facts: Vec<ModuleFacts> = prep.iter().map(|p| p.facts.clone()).collect();
    let mut witnesses = Vec::new();

    let gext = |x: usize, y: usize, i: usize| gext_dim(&mods[x], &mods[y], i);
    // the map Gext^i → Ext^i starts at Gext^i = 0, so it is an isomorphism iff Ext^i = 0
    for x in 0..mods.len() {
        for y in 0..mods.len() {
            for i in 1..=TOP as usize {
                if gext(x, y, i)? != 0 {
                    return Err(LabError::Certificate("nonzero Gext in positive degree".into()));
                }
            }
        }
    }
    let ext_deg = |x: usize, y: usize, lo: i64, hi: i64| -> Vec<(i64, usize)> {
        (lo..=hi).map(|i| (i, tables[x][y].0[(i - 1) as usize])).collect()
    };
    let tate_deg = |x: usize, y: usize, lo: i64, hi: i64| -> Vec<(i64, usize)> {
        match &tables[x][y].1 {
            Some(t) => (lo..=hi).map(|i| (i, t[(i + TOP) as usize])).collect(),
            None => vec![],
        }
    };
    let c1 = pair_witness(mods, &mut witnesses, "ext", &|x, y| ext_deg(x, y, 1, 1));
    let c2 = pair_witness(mods, &mut witnesses, "ext", &|x, y| ext_deg(x, y, 1, TOP));
    let c3 = pair_witness(mods, &mut witnesses, "tate", &|x, y| tate_deg(x, y, 1, TOP));
    let c4 = module_witness(&facts, &mut witnesses, "infinite-pd", &|f| f.pd.finite().is_none());
    let c5 = module_witness(&facts, &mut witnesses, "gorenstein-injective-not-injective", &|f| f.gorenstein_injective && !f.injective);
    let c6 = module_witness(&facts, &mut witnesses, "gorenstein-projective-not-projective", &|f| f.gorenstein_projective && !f.projective);
    let c7 = pair_witness(mods, &mut witnesses, "tate", &|x, y| tate_deg(x, y, -TOP, TOP));
    let vanishing_degree = (-TOP..=TOP).find(|&i| {
        (0..mods.len()).all(|x| (0..mods.len()).all(|y| tate_deg(x, y, i, i).iter().all(|&(_, v)| v == 0)))
    });
    let c8 = vanishing_degree.is_some();
    let statements = [
        "Gext^1 -> Ext^1 is an isomorphism for all X, Y",
        "Gext^i -> Ext^i is an isomorphism for all X, Y and 1 <= i <= 5",
        "tate Ext^i(X, Y) = 0 for all X, Y and 1 <= i <= 5",
        "every module has finite projective dimension",
        "every Gorenstein injective module is injective",
        "every Gorenstein projective module is projective",
        "tate Ext^i(X, Y) = 0 for all X, Y and |i| <= 5",
        "some i with |i| <= 5 has tate Ext^i(X, Y) = 0 for all X, Y",
    ];
    let holds = [c1, c2, c3, c4, c5, c6, c7, c8];
    let conditions: Vec<Condition> = statements
        .iter()
        .zip(holds)
        .enumerate()
        .map(|(i, (s, h))| Condition { index: i + 1, statement: s.to_string(), holds: h })
        .collect();
    let conditions_coherent = holds.iter().all(|&h| h == holds[0]);

    let max_of = |f: &dyn Fn(&ModuleFacts) -> Option<usize>| facts.iter().filter_map(f).max();
    let fpd = max_of(&|f| f.pd.finite());
    let fid = max_of(&|f| f.id.finite());
    let all_gp = facts.iter().all(|f| f.gorenstein_projective);
    let all_gi = facts.iter().all(|f| f.gorenstein_injective);
    let gl_gpd = all_gp.then_some(0);
    let gl_gid = all_gi.then_some(0);
    let decided = facts.iter().all(|f| f.pd != Dim::Unknown && f.id != Dim::Unknown);
    let predicates = Predicates {
        self_injective: true,
        local: ring.is_local(),
        field: ring.is_field(),
        all_gorenstein_projective: all_gp,
        all_gorenstein_injective: all_gi,
        finite_pd_iff_finite_id: decided && facts.iter().all(|f| f.pd.finite().is_some() == f.id.finite().is_some()),
        fpd,
        fid,
        gl_gpd,
        gl_gid,
        dimensions_agree: fpd.is_some() && fpd == fid && fid == gl_gpd && gl_gpd == gl_gid,
        conditions,
        conditions_coherent,
    };
    for f in &facts {
        if let (Dim::Infinite, Some((i, p))) = (f.pd, f.period) {
            witnesses.push(Witness {
                kind: format!("syzygy-period-from-{i}"),
                module: f.description.clone(),
                against: None,
                degree: None,
                value: p,
            });
        }
    }
    Ok(GorensteinReport {
        ring: ring.name().to_string(),
        universe: UniverseSummary {
            max_generators: universe.max_gens,
            max_relations: universe.max_rels,
            size_bound: universe.size_bound,
            presentations: universe.presentations,
            excluded: universe.excluded,
            classes: mods.len(),
        },
        predicates,
        witnesses,
        modules: facts,
    })
}

/// Report over modules with at most two generators and two relations.
pub fn gorenstein_predicates(ring: &Arc<FiniteRing>, size_bound: usize) -> Result<GorensteinReport> {
    report_for(&enumerate_universe(ring, 2, 2, size_bound)?)
}
