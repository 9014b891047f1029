//! The quiver model of projective space: vertices are nonempty subsets of
//! `{0..n}`, values are windowed spaces of Laurent monomials.
//!
//! A section of `O(d)` over the chart `v` is a Laurent monomial `x^a` with
//! `Σa = d` and `a_i ≥ 0` for `i ∉ v`. Every computation is restricted to the
//! window `|a_i| ≤ W`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{LinalgError, Matrix, QuotientSpace};
use crate::scalar::Field;

/// Largest supported `n`.
pub const MAX_N: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuiverError {
    #[error("invalid vertex: {0}")]
    InvalidVertex(String),
    #[error("window {window} too small, need at least {needed}")]
    WindowTooSmall { window: usize, needed: usize },
    #[error("{0} is not contained in {1}")]
    NotSubset(String, String),
    #[error("invalid presentation: {0}")]
    Presentation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("index {index} out of range 0..={max}")]
    OutOfRange { index: usize, max: usize },
    #[error("certificate failed: {0}")]
    Certificate(String),
    #[error("the module is zero")]
    ZeroModule,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, QuiverError>;

/// A nonempty subset of `{0..n}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Vertex {
    n: usize,
    mask: u32,
}

impl Vertex {
    pub fn new(n: usize, members: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &i in members {
            if i > n {
                return Err(QuiverError::InvalidVertex(format!("index {i} exceeds n = {n}")));
            }
            mask |= 1 << i;
        }
        Self::from_mask(n, mask)
    }

    pub fn from_mask(n: usize, mask: u32) -> Result<Self> {
        if n > MAX_N {
            return Err(QuiverError::InvalidVertex(format!("n = {n} exceeds {MAX_N}")));
        }
        if mask == 0 {
            return Err(QuiverError::InvalidVertex("empty subset".into()));
        }
        if mask >> (n + 1) != 0 {
            return Err(QuiverError::InvalidVertex(format!("mask {mask:#b} exceeds n = {n}")));
        }
        Ok(Vertex { n, mask })
    }

    pub fn full(n: usize) -> Self {
        Vertex { n, mask: (1u32 << (n + 1)) - 1 }
    }

    /// Parses `0,1`, `{0,1}` or `01`.
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('{').trim_end_matches('}');
        let parts: Vec<&str> = if body.contains(',') {
            body.split(',').map(str::trim).collect()
        } else {
            body.char_indices().map(|(i, c)| &body[i..i + c.len_utf8()]).collect()
        };
        let mut members = Vec::new();
        for p in parts.into_iter().filter(|p| !p.is_empty()) {
            members.push(p.parse::<usize>().map_err(|_| QuiverError::Parse(format!("bad vertex `{s}`")))?);
        }
        Self::new(n, &members)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn members(&self) -> Vec<usize> {
        (0..=self.n).filter(|&i| self.contains(i)).collect()
    }

    pub fn contains(&self, i: usize) -> bool {
        i <= self.n && self.mask & (1 << i) != 0
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> usize {
        self.mask.trailing_zeros() as usize
    }

    pub fn is_subset(&self, other: &Vertex) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn union(&self, other: &Vertex) -> Vertex {
        Vertex { n: self.n, mask: self.mask | other.mask }
    }
}

impl Ord for Vertex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then(self.len().cmp(&other.len()))
            .then_with(|| self.members().cmp(&other.members()))
    }
}

impl PartialOrd for Vertex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.members().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", m.join(","))
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Vertex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.members().serialize(s)
    }
}

/// All nonempty subsets of `{0..n}`, by cardinality and then lexicographically.
pub fn vertices(n: usize) -> Vec<Vertex> {
    assert!(n <= MAX_N, "n = {n} exceeds {MAX_N}");
    let mut vs: Vec<Vertex> = (1..(1u32 << (n + 1))).map(|mask| Vertex { n, mask }).collect();
    vs.sort();
    vs
}

/// Vertices of cardinality `k`, in the canonical order.
pub fn vertices_of_size(n: usize, k: usize) -> Vec<Vertex> {
    vertices(n).into_iter().filter(|v| v.len() == k).collect()
}

/// Exponent vector of a Laurent monomial.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiDegree(pub Vec<i64>);

impl MultiDegree {
    pub fn zero(n: usize) -> Self {
        MultiDegree(vec![0; n + 1])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n + 1];
        v[i] = 1;
        MultiDegree(v)
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Indices with a negative exponent.
    pub fn neg_set(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] < 0).collect()
    }

    /// True when `x^self` is allowed over the chart `v`.
    pub fn valid_at(&self, v: &Vertex) -> bool {
        self.0.iter().enumerate().all(|(i, &a)| a >= 0 || v.contains(i))
    }

    pub fn max_abs(&self) -> usize {
        self.0.iter().map(|a| a.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn add(&self, o: &MultiDegree) -> MultiDegree {
        MultiDegree(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &MultiDegree) -> MultiDegree {
        MultiDegree(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i64) -> MultiDegree {
        MultiDegree(self.0.iter().map(|a| a * k).collect())
    }
}

impl fmt::Display for MultiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Debug for MultiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// All `a ∈ ℤ^{n+1}` with `Σa = d`, `|a_i| ≤ w`, and `a_i ≥ 0` off `chart`
/// (no sign condition when `chart` is `None`), in lexicographic order.
pub fn enumerate_exponents(n: usize, d: i64, w: usize, chart: Option<&Vertex>) -> Vec<MultiDegree> {
    fn rec(i: usize, n: usize, rest: i64, w: i64, chart: Option<&Vertex>, cur: &mut Vec<i64>, out: &mut Vec<MultiDegree>) {
        let lo = |i: usize| if chart.is_none_or(|v| v.contains(i)) { -w } else { 0 };
        if i == n {
            if rest >= lo(i) && rest <= w {
                cur.push(rest);
                out.push(MultiDegree(cur.clone()));
                cur.pop();
            }
            return;
        }
        let remaining_lo: i64 = (i + 1..=n).map(lo).sum();
        let remaining_hi = (n - i) as i64 * w;
        for a in lo(i)..=w {
            let r = rest - a;
            if r < remaining_lo || r > remaining_hi {
                continue;
            }
            cur.push(a);
            rec(i + 1, n, r, w, chart, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, d, w as i64, chart, &mut Vec::with_capacity(n + 1), &mut out);
    out
}

/// Windowed degree-`d` piece of `O(d)(v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionSpace {
    pub vertex: Vertex,
    pub degree: i64,
    pub window: usize,
    pub basis: Vec<MultiDegree>,
}

impl SectionSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

pub fn section_basis(v: &Vertex, d: i64, w: usize) -> Result<SectionSpace> {
    if (d.unsigned_abs() as usize) > w {
        return Err(QuiverError::WindowTooSmall { window: w, needed: d.unsigned_abs() as usize });
    }
    Ok(SectionSpace { vertex: *v, degree: d, window: w, basis: enumerate_exponents(v.n(), d, w, Some(v)) })
}

/// Inclusion of the windowed sections over `v` into those over `w ⊇ v`.
pub fn restriction_matrix<F: Field>(v: &Vertex, w: &Vertex, d: i64, window: usize) -> Result<Matrix<F>> {
    if !v.is_subset(w) || v.n() != w.n() {
        return Err(QuiverError::NotSubset(v.to_string(), w.to_string()));
    }
    let src = section_basis(v, d, window)?;
    let dst = section_basis(w, d, window)?;
    let index: HashMap<&MultiDegree, usize> = dst.basis.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut m = Matrix::zeros(dst.dim(), src.dim());
    for (j, a) in src.basis.iter().enumerate() {
        m.set(index[a], j, F::one());
    }
    Ok(m)
}

/// One monomial term `coef · x^exp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term<F> {
    pub coef: F,
    pub exp: MultiDegree,
}

/// Per-generator multidegree shifts making every entry homogeneous, when they exist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Grading {
    Fine { target_shift: Vec<MultiDegree>, source_shift: Vec<MultiDegree> },
    Coarse,
}

/// `coker(⊕O(a_i) → ⊕O(b_j))`. Entry `(j, i)` is a polynomial of total
/// degree `b_j - a_i`. With a `chart`, exponents at chart indices may be
/// negative and the object is a module over the chart ring rather than a sheaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistPresentation<F> {
    n: usize,
    targets: Vec<i64>,
    sources: Vec<i64>,
    entries: Vec<Vec<Vec<Term<F>>>>,
    chart: Option<Vertex>,
    grading: Grading,
}

/// A basis vector of a target summand: the section `x^exp` of `O(b_gen)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub gen: usize,
    pub exp: MultiDegree,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}·x^{}", self.gen, self.exp)
    }
}

impl<F: Field> TwistPresentation<F> {
    /// `entries[j][i]` lists the terms of entry `(j, i)`.
    pub fn new(
        n: usize,
        targets: Vec<i64>,
        sources: Vec<i64>,
        entries: Vec<Vec<Vec<Term<F>>>>,
        chart: Option<Vertex>,
    ) -> Result<Self> {
        if n > MAX_N {
            return Err(QuiverError::Presentation(format!("n = {n} exceeds {MAX_N}")));
        }
        if let Some(c) = &chart {
            if c.n() != n {
                return Err(QuiverError::Presentation("chart lives over a different n".into()));
            }
        }
        if entries.len() != targets.len() || entries.iter().any(|r| r.len() != sources.len()) {
            return Err(QuiverError::Presentation(format!(
                "matrix must be {} x {}",
                targets.len(),
                sources.len()
            )));
        }
        let mut clean = Vec::with_capacity(entries.len());
        for (j, row) in entries.into_iter().enumerate() {
            let mut crow = Vec::with_capacity(row.len());
            for (i, terms) in row.into_iter().enumerate() {
                let mut merged: BTreeMap<MultiDegree, F> = BTreeMap::new();
                for t in terms {
                    if t.exp.0.len() != n + 1 {
                        return Err(QuiverError::Presentation(format!("entry ({j},{i}): exponent length")));
                    }
                    if t.exp.total() != targets[j] - sources[i] {
                        return Err(QuiverError::Presentation(format!(
                            "entry ({j},{i}) has a term of degree {}, expected {}",
                            t.exp.total(),
                            targets[j] - sources[i]
                        )));
                    }
                    // without a chart no index may be negative
                    let allowed_negative = chart.unwrap_or(Vertex { n, mask: 0 });
                    if t.exp.0.iter().enumerate().any(|(k, &a)| a < 0 && !allowed_negative.contains(k)) {
                        return Err(QuiverError::Presentation(format!("entry ({j},{i}) has a negative exponent")));
                    }
                    let e = merged.entry(t.exp).or_insert_with(F::zero);
                    *e = e.clone() + t.coef;
                }
                crow.push(
                    merged.into_iter().filter(|(_, c)| !c.is_zero()).map(|(exp, coef)| Term { coef, exp }).collect(),
                );
            }
            clean.push(crow);
        }
        let grading = fine_grading(n, &clean, targets.len(), sources.len());
        Ok(TwistPresentation { n, targets, sources, entries: clean, chart, grading })
    }

    /// The twisting sheaf `O(d)`.
    pub fn twist(n: usize, d: i64) -> Self {
        Self::new(n, vec![d], vec![], vec![vec![]], None).expect("twist presentation")
    }

    /// `⊕ O(d)` over the given twists, with no relations.
    pub fn free(n: usize, twists: Vec<i64>) -> Self {
        let rows = twists.len();
        Self::new(n, twists, vec![], vec![vec![]; rows], None).expect("free presentation")
    }

    /// The zero sheaf presented as `coker(O(0) --1--> O(0))`.
    pub fn zero(n: usize) -> Self {
        let one = Term { coef: F::one(), exp: MultiDegree::zero(n) };
        Self::new(n, vec![0], vec![0], vec![vec![vec![one]]], None).expect("zero presentation")
    }

    /// The same presentation regarded as a module over the chart ring of `chart`.
    pub fn with_chart(mut self, chart: Vertex) -> Result<Self> {
        if chart.n() != self.n {
            return Err(QuiverError::Presentation("chart lives over a different n".into()));
        }
        if let Some(c) = self.chart {
            if !c.is_subset(&chart) {
                return Err(QuiverError::NotSubset(c.to_string(), chart.to_string()));
            }
        }
        self.chart = Some(chart);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn targets(&self) -> &[i64] {
        &self.targets
    }

    pub fn sources(&self) -> &[i64] {
        &self.sources
    }

    pub fn entry(&self, j: usize, i: usize) -> &[Term<F>] {
        &self.entries[j][i]
    }

    pub fn chart(&self) -> Option<Vertex> {
        self.chart
    }

    pub fn grading(&self) -> &Grading {
        &self.grading
    }

    pub fn is_monomial(&self) -> bool {
        matches!(self.grading, Grading::Fine { .. })
    }

    /// Largest `|e_i|` over all entry exponents.
    pub fn entry_reach(&self) -> usize {
        self.entries.iter().flatten().flatten().map(|t| t.exp.max_abs()).max().unwrap_or(0)
    }

    fn check_window(&self, w: usize) -> Result<()> {
        let need = self.entry_reach();
        if need > w {
            return Err(QuiverError::WindowTooSmall { window: w, needed: need });
        }
        Ok(())
    }

    fn check_chart(&self, u: &Vertex) -> Result<()> {
        if u.n() != self.n {
            return Err(QuiverError::InvalidVertex(format!("{u} is not a vertex over n = {}", self.n)));
        }
        if let Some(c) = &self.chart {
            if !c.is_subset(u) {
                return Err(QuiverError::NotSubset(c.to_string(), u.to_string()));
            }
        }
        Ok(())
    }

    pub fn target_shift(&self, j: usize) -> Option<&MultiDegree> {
        match &self.grading {
            Grading::Fine { target_shift, .. } => Some(&target_shift[j]),
            Grading::Coarse => None,
        }
    }

    /// Slice keys reported at `u` in window `w`.
    pub fn keys_at(&self, u: &Vertex, w: usize) -> Vec<SliceKey> {
        match &self.grading {
            Grading::Coarse => vec![SliceKey::Block],
            Grading::Fine { target_shift, .. } => {
                let mut keys = BTreeSet::new();
                for (j, &b) in self.targets.iter().enumerate() {
                    for m in enumerate_exponents(self.n, b, w, Some(u)) {
                        keys.insert(m.add(&target_shift[j]));
                    }
                }
                keys.into_iter().map(SliceKey::Fine).collect()
            }
        }
    }

    /// Slice keys reported at any vertex in window `w`.
    pub fn window_keys(&self, w: usize) -> Vec<SliceKey> {
        match &self.grading {
            Grading::Coarse => vec![SliceKey::Block],
            Grading::Fine { target_shift, .. } => {
                let mut keys = BTreeSet::new();
                for (j, &b) in self.targets.iter().enumerate() {
                    for m in enumerate_exponents(self.n, b, w, None) {
                        keys.insert(m.add(&target_shift[j]));
                    }
                }
                keys.into_iter().map(SliceKey::Fine).collect()
            }
        }
    }

    /// Cokernel of the localized presentation at `u` restricted to one slice.
    pub fn slice(&self, u: &Vertex, key: &SliceKey, w: usize) -> Result<Slice<F>> {
        self.check_chart(u)?;
        let mut labels = Vec::new();
        let mut columns: Vec<Vec<(usize, F)>> = Vec::new();
        match (key, &self.grading) {
            (SliceKey::Fine(d), Grading::Fine { target_shift, source_shift }) => {
                let mut pos = vec![None; self.targets.len()];
                for (j, &b) in self.targets.iter().enumerate() {
                    let m = d.sub(&target_shift[j]);
                    if m.total() == b && m.valid_at(u) {
                        pos[j] = Some(labels.len());
                        labels.push(Label { gen: j, exp: m });
                    }
                }
                for (i, &a) in self.sources.iter().enumerate() {
                    let m = d.sub(&source_shift[i]);
                    if m.total() != a || !m.valid_at(u) {
                        continue;
                    }
                    let mut col = Vec::new();
                    for j in 0..self.targets.len() {
                        if let Some(t) = self.entries[j][i].first() {
                            let p = pos[j].ok_or_else(|| {
                                QuiverError::Presentation(format!("image of source {i} leaves the chart"))
                            })?;
                            col.push((p, t.coef.clone()));
                        }
                    }
                    columns.push(col);
                }
            }
            (SliceKey::Block, _) => {
                let mut index = HashMap::new();
                for (j, &b) in self.targets.iter().enumerate() {
                    for m in enumerate_exponents(self.n, b, w, Some(u)) {
                        index.insert(Label { gen: j, exp: m.clone() }, labels.len());
                        labels.push(Label { gen: j, exp: m });
                    }
                }
                for (i, &a) in self.sources.iter().enumerate() {
                    'src: for m in enumerate_exponents(self.n, a, w, Some(u)) {
                        let mut col = Vec::new();
                        for j in 0..self.targets.len() {
                            for t in &self.entries[j][i] {
                                match index.get(&Label { gen: j, exp: m.add(&t.exp) }) {
                                    Some(&p) => col.push((p, t.coef.clone())),
                                    None => continue 'src,
                                }
                            }
                        }
                        columns.push(col);
                    }
                }
            }
            (SliceKey::Fine(_), Grading::Coarse) => {
                return Err(QuiverError::Unsupported("multidegree slices of a non-monomial presentation".into()))
            }
        }
        let mut gens = Matrix::<F>::zeros(labels.len(), columns.len());
        for (c, col) in columns.into_iter().enumerate() {
            for (r, v) in col {
                let cur = gens.get(r, c).clone();
                gens.set(r, c, cur + v);
            }
        }
        let quotient = QuotientSpace::new(labels.len(), &gens)?;
        Ok(Slice { key: key.clone(), vertex: *u, labels, quotient })
    }

    /// Relations among the generators of the value at `w`, as
    /// `(target, coefficient, exponent)` triples per source. The generator of
    /// target `j` at `w` is `x_k^{b_j} e_j` with `k = min w`.
    pub fn relations_at(&self, w: &Vertex) -> Vec<Vec<(usize, F, MultiDegree)>> {
        let k = w.min();
        (0..self.sources.len())
            .map(|i| {
                let mut rel = Vec::new();
                for j in 0..self.targets.len() {
                    for t in &self.entries[j][i] {
                        let shift = MultiDegree::unit(self.n, k).scale(self.sources[i] - self.targets[j]);
                        rel.push((j, t.coef.clone(), t.exp.add(&shift)));
                    }
                }
                rel
            })
            .collect()
    }

    /// Exponent of the generator of target `j` at `w`.
    pub fn generator_exp(&self, j: usize, w: &Vertex) -> MultiDegree {
        MultiDegree::unit(self.n, w.min()).scale(self.targets[j])
    }

    /// Multidegree of the generator of target `j` at `w` (monomial type only).
    pub fn generator_degree(&self, j: usize, w: &Vertex) -> Option<MultiDegree> {
        self.target_shift(j).map(|s| self.generator_exp(j, w).add(s))
    }
}

/// Solves for shifts with `σ_i = δ_j + e_ji` on every nonzero entry.
fn fine_grading<F: Field>(n: usize, entries: &[Vec<Vec<Term<F>>>], nt: usize, ns: usize) -> Grading {
    if entries.iter().flatten().any(|t| t.len() > 1) {
        return Grading::Coarse;
    }
    let mut tshift: Vec<Option<MultiDegree>> = vec![None; nt];
    let mut sshift: Vec<Option<MultiDegree>> = vec![None; ns];
    for root in 0..nt + ns {
        let seeded = if root < nt { tshift[root].is_some() } else { sshift[root - nt].is_some() };
        if seeded {
            continue;
        }
        if root < nt {
            tshift[root] = Some(MultiDegree::zero(n));
        } else {
            sshift[root - nt] = Some(MultiDegree::zero(n));
        }
        let mut queue = VecDeque::from([root]);
        while let Some(node) = queue.pop_front() {
            if node < nt {
                let j = node;
                let d = tshift[j].clone().expect("visited");
                for i in 0..ns {
                    if let Some(t) = entries[j][i].first() {
                        let s = d.add(&t.exp);
                        match &sshift[i] {
                            None => {
                                sshift[i] = Some(s);
                                queue.push_back(nt + i);
                            }
                            Some(old) if *old != s => return Grading::Coarse,
                            _ => {}
                        }
                    }
                }
            } else {
                let i = node - nt;
                let s = sshift[i].clone().expect("visited");
                for j in 0..nt {
                    if let Some(t) = entries[j][i].first() {
                        let d = s.sub(&t.exp);
                        match &tshift[j] {
                            None => {
                                tshift[j] = Some(d);
                                queue.push_back(j);
                            }
                            Some(old) if *old != d => return Grading::Coarse,
                            _ => {}
                        }
                    }
                }
            }
        }
    }
    Grading::Fine {
        target_shift: tshift.into_iter().map(|x| x.expect("all visited")).collect(),
        source_shift: sshift.into_iter().map(|x| x.expect("all visited")).collect(),
    }
}

/// Which part of a value a slice describes: one multidegree, or the whole
/// windowed block for non-monomial presentations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SliceKey {
    Fine(MultiDegree),
    Block,
}

impl SliceKey {
    pub fn degree(&self) -> Option<&MultiDegree> {
        match self {
            SliceKey::Fine(d) => Some(d),
            SliceKey::Block => None,
        }
    }
}

impl fmt::Display for SliceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SliceKey::Fine(d) => write!(f, "{d}"),
            SliceKey::Block => write!(f, "block"),
        }
    }
}

/// One slice of a value: the span of the target labels modulo the image.
#[derive(Clone, Debug)]
pub struct Slice<F> {
    pub key: SliceKey,
    pub vertex: Vertex,
    labels: Vec<Label>,
    quotient: QuotientSpace<F>,
}

impl<F: Field> Slice<F> {
    pub fn dim(&self) -> usize {
        self.quotient.dim()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Labels whose classes form the quotient basis.
    pub fn reps(&self) -> Vec<Label> {
        self.quotient.reps().iter().map(|&i| self.labels[i].clone()).collect()
    }

    pub fn position(&self, l: &Label) -> Option<usize> {
        self.labels.binary_search(l).ok()
    }

    /// Coordinates of the class of `Σ c·label`.
    pub fn class_of(&self, terms: &[(F, Label)]) -> Result<Vec<F>> {
        let mut v = vec![F::zero(); self.labels.len()];
        for (c, l) in terms {
            let p = self.position(l).ok_or_else(|| {
                QuiverError::Presentation(format!("{l} is not a section at {} in slice {}", self.vertex, self.key))
            })?;
            v[p] = v[p].clone() + c.clone();
        }
        Ok(self.quotient.coords(&v))
    }

    /// Class of a quotient-coordinate vector, written on representative labels.
    pub fn terms_of(&self, coords: &[F]) -> Vec<(F, Label)> {
        self.quotient
            .reps()
            .iter()
            .zip(coords)
            .filter(|(_, c)| !c.is_zero())
            .map(|(&i, c)| (c.clone(), self.labels[i].clone()))
            .collect()
    }

    /// Matrix of the map induced on quotients by a label-level map.
    pub fn map_to(&self, to: &Slice<F>, f: impl Fn(&Label) -> Vec<(F, Label)>) -> Result<Matrix<F>> {
        let mut m = Matrix::zeros(to.dim(), self.dim());
        for (c, l) in self.reps().iter().enumerate() {
            let col = to.class_of(&f(l))?;
            for (r, v) in col.into_iter().enumerate() {
                m.set(r, c, v);
            }
        }
        Ok(m)
    }

    /// Restriction to a slice with the same key at a larger vertex.
    pub fn restrict_to(&self, to: &Slice<F>) -> Result<Matrix<F>> {
        if !self.vertex.is_subset(&to.vertex) {
            return Err(QuiverError::NotSubset(self.vertex.to_string(), to.vertex.to_string()));
        }
        self.map_to(to, |l| vec![(F::one(), l.clone())])
    }

    /// Multiplication by `x^c` into the slice keyed by the shifted degree.
    pub fn multiply_to(&self, to: &Slice<F>, c: &MultiDegree) -> Result<Matrix<F>> {
        self.map_to(to, |l| vec![(F::one(), Label { gen: l.gen, exp: l.exp.add(c) })])
    }
}

/// Windowed value of a presentation at one vertex, slice by slice.
#[derive(Clone, Debug)]
pub struct GradedFamily<F> {
    pub vertex: Vertex,
    pub window: usize,
    pub slices: Vec<Slice<F>>,
}

impl<F: Field> GradedFamily<F> {
    pub fn total_dim(&self) -> usize {
        self.slices.iter().map(|s| s.dim()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    pub fn dims(&self) -> Vec<(SliceKey, usize)> {
        self.slices.iter().map(|s| (s.key.clone(), s.dim())).collect()
    }

    pub fn get(&self, key: &SliceKey) -> Option<&Slice<F>> {
        self.slices.binary_search_by(|s| s.key.cmp(key)).ok().map(|i| &self.slices[i])
    }
}

/// Slices of `P` at `u` for the given keys, computed in parallel, in key order.
pub fn slices_for<F: Field>(
    p: &TwistPresentation<F>,
    u: &Vertex,
    keys: &[SliceKey],
    w: usize,
) -> Result<Vec<Slice<F>>> {
    keys.par_iter().map(|k| p.slice(u, k, w)).collect()
}

/// Windowed sections of the presented sheaf over `v`.
pub fn coker_sections<F: Field>(p: &TwistPresentation<F>, v: &Vertex, w: usize) -> Result<GradedFamily<F>> {
    p.check_window(w)?;
    p.check_chart(v)?;
    let keys = p.keys_at(v, w);
    Ok(GradedFamily { vertex: *v, window: w, slices: slices_for(p, v, &keys, w)? })
}

/// Vertices carrying a nonzero slice in the window, in canonical order.
pub fn supp<F: Field>(p: &TwistPresentation<F>, w: usize) -> Result<Vec<Vertex>> {
    if p.chart().is_some() {
        return Err(QuiverError::Unsupported("support of a chart module".into()));
    }
    let mut out = Vec::new();
    for v in vertices(p.n()) {
        if !coker_sections(p, &v, w)?.is_zero() {
            out.push(v);
        }
    }
    Ok(out)
}

/// Support together with a flag telling whether widening the window by 2 changes it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuppReport {
    pub vertices: Vec<Vertex>,
    pub window: usize,
    pub stable: bool,
}

pub fn supp_report<F: Field>(p: &TwistPresentation<F>, w: usize) -> Result<SuppReport> {
    let a = supp(p, w)?;
    let b = supp(p, w + 2)?;
    Ok(SuppReport { stable: a == b, vertices: a, window: w })
}

/// True when every subset of a member is a member.
pub fn is_down_closed(set: &[Vertex]) -> bool {
    set.iter().all(|w| {
        vertices(w.n()).iter().filter(|u| u.is_subset(w)).all(|u| set.contains(u))
    })
}

/// Maximal elements of a set of vertices under inclusion.
pub fn maximal(set: &[Vertex]) -> Vec<Vertex> {
    set.iter().filter(|v| !set.iter().any(|w| w != *v && v.is_subset(w))).copied().collect()
}

/// Values at every vertex of the quiver for one presentation and window.
#[derive(Clone, Debug)]
pub struct QCohValue<F> {
    pub window: usize,
    pub values: BTreeMap<Vertex, GradedFamily<F>>,
}

impl<F: Field> QCohValue<F> {
    pub fn build(p: &TwistPresentation<F>, w: usize) -> Result<Self> {
        let mut values = BTreeMap::new();
        for v in vertices(p.n()) {
            values.insert(v, coker_sections(p, &v, w)?);
        }
        Ok(QCohValue { window: w, values })
    }

    /// Restriction matrices compose along every chain `u ⊆ v ⊆ w`.
    pub fn check_functorial(&self) -> Result<()> {
        let vs: Vec<&Vertex> = self.values.keys().collect();
        for u in &vs {
            for v in vs.iter().filter(|v| u.is_subset(v)) {
                for w in vs.iter().filter(|w| v.is_subset(w)) {
                    for su in &self.values[u].slices {
                        let (Some(sv), Some(sw)) = (self.values[v].get(&su.key), self.values[w].get(&su.key)) else {
                            continue;
                        };
                        let direct = su.restrict_to(sw)?;
                        let composite = sv.restrict_to(sw)?.mul(&su.restrict_to(sv)?)?;
                        if direct != composite {
                            return Err(QuiverError::Certificate(format!(
                                "restriction {u}→{v}→{w} differs from {u}→{w} at {}",
                                su.key
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// For every edge `u ⊂ u ∪ {i}` and reported multidegree: the kernel of
    /// restriction is the `x_i/x_k`-torsion and every section over the larger
    /// vertex becomes a restriction after multiplying by a power of `x_i/x_k`.
    pub fn check_localization(&self, p: &TwistPresentation<F>) -> Result<()> {
        let Grading::Fine { target_shift, source_shift } = p.grading() else {
            return Ok(());
        };
        let n = p.n();
        for (u, fam) in &self.values {
            for i in (0..=n).filter(|&i| !u.contains(i)) {
                let w = u.union(&Vertex::new(n, &[i])?);
                let k = u.min();
                let c = MultiDegree::unit(n, i).sub(&MultiDegree::unit(n, k));
                for s in &fam.slices {
                    let SliceKey::Fine(d) = &s.key else { continue };
                    let at_w = p.slice(&w, &s.key, self.window)?;
                    // torsion exponent: every relation valid over w becomes valid over u
                    let k0 = (0..p.sources().len())
                        .map(|src| d.sub(&source_shift[src]))
                        .filter(|m| m.valid_at(&w))
                        .map(|m| (-m.0[i]).max(0))
                        .max()
                        .unwrap_or(0);
                    let shifted = SliceKey::Fine(d.add(&c.scale(k0)));
                    let s_k = p.slice(u, &shifted, self.window)?;
                    let mult = s.multiply_to(&s_k, &c.scale(k0))?;
                    let res = s.restrict_to(&at_w)?;
                    let ker_res = res.kernel_basis();
                    if !mult.mul(&ker_res)?.is_zero() || mult.kernel_basis().cols() != ker_res.cols() {
                        return Err(QuiverError::Certificate(format!(
                            "kernel of {u}→{w} at {d} is not torsion"
                        )));
                    }
                    let k1 = (0..p.targets().len())
                        .map(|t| d.sub(&target_shift[t]))
                        .filter(|m| m.valid_at(&w))
                        .map(|m| (-m.0[i]).max(0))
                        .max()
                        .unwrap_or(0);
                    let lifted = SliceKey::Fine(d.add(&c.scale(k1)));
                    let from = p.slice(u, &lifted, self.window)?;
                    let to = p.slice(&w, &lifted, self.window)?;
                    if from.restrict_to(&to)?.rank() != at_w.dim() {
                        return Err(QuiverError::Certificate(format!(
                            "sections over {w} at {d} are not reached from {u}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermFile {
    coef: String,
    exp: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct EntryFile {
    row: usize,
    col: usize,
    terms: Vec<TermFile>,
}

#[derive(Serialize, Deserialize)]
struct PresentationFile {
    n: usize,
    targets: Vec<i64>,
    sources: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chart: Option<Vec<usize>>,
    #[serde(default)]
    entries: Vec<EntryFile>,
}

impl<F: Field> TwistPresentation<F> {
    /// Reads the JSON presentation format (see the crate README).
    pub fn from_json(s: &str) -> Result<Self> {
        let f: PresentationFile = serde_json::from_str(s).map_err(|e| QuiverError::Parse(e.to_string()))?;
        let mut entries = vec![vec![Vec::new(); f.sources.len()]; f.targets.len()];
        for e in f.entries {
            if e.row >= f.targets.len() || e.col >= f.sources.len() {
                return Err(QuiverError::Parse(format!("entry ({}, {}) out of range", e.row, e.col)));
            }
            for t in e.terms {
                let coef = F::parse_scalar(&t.coef)
                    .ok_or_else(|| QuiverError::Parse(format!("bad coefficient `{}`", t.coef)))?;
                entries[e.row][e.col].push(Term { coef, exp: MultiDegree(t.exp) });
            }
        }
        let chart = f.chart.map(|c| Vertex::new(f.n, &c)).transpose()?;
        Self::new(f.n, f.targets, f.sources, entries, chart)
    }

    pub fn to_json(&self) -> String {
        let mut entries = Vec::new();
        for (j, row) in self.entries.iter().enumerate() {
            for (i, terms) in row.iter().enumerate() {
                if terms.is_empty() {
                    continue;
                }
                entries.push(EntryFile {
                    row: j,
                    col: i,
                    terms: terms.iter().map(|t| TermFile { coef: t.coef.to_text(), exp: t.exp.0.clone() }).collect(),
                });
            }
        }
        let f = PresentationFile {
            n: self.n,
            targets: self.targets.clone(),
            sources: self.sources.clone(),
            chart: self.chart.map(|c| c.members()),
            entries,
        };
        serde_json::to_string(&f).expect("serializable")
    }
}
