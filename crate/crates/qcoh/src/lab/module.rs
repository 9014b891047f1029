//! Finitely presented modules `R^g / (relations)` with enumerated carriers.

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use super::ring::FiniteRing;
use super::{LabError, Result};

/// Cap on the number of vectors enumerated for any single carrier.
pub const ENUM_LIMIT: usize = 1 << 20;

/// A finite module whose elements can be added and scaled.
pub trait Carrier {
    type Elem: Clone + Eq + Hash + Ord;
    fn ring(&self) -> &FiniteRing;
    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn smul(&self, r: u8, a: &Self::Elem) -> Self::Elem;
}

/// Submodule generated by `gens`, sorted.
pub fn span<C: Carrier>(c: &C, gens: &[C::Elem]) -> Vec<C::Elem> {
    let mut set: HashSet<C::Elem> = HashSet::from([c.zero()]);
    let ring = c.ring();
    for g in gens {
        if set.contains(g) {
            continue;
        }
        let multiples: Vec<C::Elem> = ring.elements().map(|r| c.smul(r, g)).collect();
        let mut next = HashSet::with_capacity(set.len() * 2);
        for s in &set {
            for m in &multiples {
                next.insert(c.add(s, m));
            }
        }
        set = next;
    }
    let mut out: Vec<C::Elem> = set.into_iter().collect();
    out.sort();
    out
}

/// `log_base(n)`, which must be exact.
fn exact_log(mut n: usize, base: usize) -> usize {
    let mut k = 0;
    while n > 1 {
        assert_eq!(n % base, 0, "group order is not a power of the residue field size");
        n /= base;
        k += 1;
    }
    k
}

/// Composition length of a submodule given by its elements.
pub fn length<C: Carrier>(c: &C, elems: &[C::Elem]) -> usize {
    c.ring()
        .primitive_idempotents()
        .iter()
        .map(|&(e, q)| {
            let part: HashSet<C::Elem> = elems.iter().map(|x| c.smul(e, x)).collect();
            exact_log(part.len(), q)
        })
        .sum()
}

/// Generators of the submodule `elems` chosen greedily modulo the radical,
/// so their number is minimal over local rings.
pub fn minimal_generators<C: Carrier>(c: &C, elems: &[C::Elem]) -> Vec<C::Elem> {
    let ring = c.ring();
    let rad = ring.ideal_elements(ring.radical());
    let rad_multiples: Vec<C::Elem> = elems.iter().flat_map(|x| rad.iter().map(move |&j| c.smul(j, x))).collect();
    let mut cur: HashSet<C::Elem> = span(c, &rad_multiples).into_iter().collect();
    let mut gens = Vec::new();
    for x in elems {
        if cur.len() == elems.len() {
            break;
        }
        if cur.contains(x) {
            continue;
        }
        let multiples: Vec<C::Elem> = ring.elements().map(|r| c.smul(r, x)).collect();
        cur = cur.iter().flat_map(|s| multiples.iter().map(move |m| c.add(s, m))).collect();
        gens.push(x.clone());
    }
    gens
}

/// Matrix over a finite ring, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RMat {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl fmt::Debug for RMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[u8]> = (0..self.rows).map(|i| &self.data[i * self.cols..(i + 1) * self.cols]).collect();
        write!(f, "{rows:?}")
    }
}

impl RMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RMat { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ring: &FiniteRing, n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, ring.one());
        }
        m
    }

    /// Matrix whose columns are the given vectors, each of length `rows`.
    pub fn from_cols(rows: usize, cols: &[Vec<u8>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for (i, &v) in c.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul(&self, ring: &FiniteRing, o: &RMat) -> RMat {
        assert_eq!(self.cols, o.rows, "shape");
        let mut m = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = 0;
                for k in 0..self.cols {
                    acc = ring.add(acc, ring.mul(self.get(i, k), o.get(k, j)));
                }
                m.set(i, j, acc);
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// `x ↦ A x` on `M^cols → M^rows`.
    pub fn apply(&self, m: &FinModule, x: &[u32]) -> Vec<u32> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(0, |acc, j| m.add_el(acc, m.smul_el(self.get(i, j), x[j]))))
            .collect()
    }

    /// `φ ↦ φ ∘ A` on `M^rows → M^cols`, i.e. `A^T`.
    pub fn apply_transpose(&self, m: &FinModule, x: &[u32]) -> Vec<u32> {
        (0..self.cols)
            .map(|j| (0..self.rows).fold(0, |acc, i| m.add_el(acc, m.smul_el(self.get(i, j), x[i]))))
            .collect()
    }
}

/// `R^g / (relations)`. Elements are class ids, with 0 the zero class.
#[derive(Clone)]
pub struct FinModule {
    ring: Arc<FiniteRing>,
    gens: usize,
    relations: Vec<Vec<u8>>,
    class_of: Vec<u32>,
    reps: Vec<u32>,
}

impl fmt::Debug for FinModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinModule({}, |M|={})", self.describe(), self.size())
    }
}

impl FinModule {
    pub fn new(ring: &Arc<FiniteRing>, gens: usize, relations: Vec<Vec<u8>>) -> Result<Self> {
        let q = ring.size();
        let total = q
            .checked_pow(gens as u32)
            .filter(|&t| t <= ENUM_LIMIT)
            .ok_or_else(|| LabError::TooLarge(format!("{}^{gens} vectors", q)))?;
        if relations.iter().any(|r| r.len() != gens) {
            return Err(LabError::Parse("relation length differs from the number of generators".into()));
        }
        let free = Power::free(ring, gens);
        let rel: Vec<Vec<u32>> = relations.iter().map(|r| r.iter().map(|&x| x as u32).collect()).collect();
        let sub = span(&free, &rel);
        let mut class_of = vec![u32::MAX; total];
        let mut reps = Vec::new();
        for code in 0..total {
            if class_of[code] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            reps.push(code as u32);
            let v = decode(code as u32, q, gens);
            for k in &sub {
                let w: Vec<u8> = v.iter().zip(k).map(|(&a, &b)| ring.add(a, b as u8)).collect();
                class_of[encode(&w, q) as usize] = id;
            }
        }
        Ok(FinModule { ring: ring.clone(), gens, relations, class_of, reps })
    }

    pub fn free(ring: &Arc<FiniteRing>, k: usize) -> Result<Self> {
        if k == 1 {
            return Ok(Self::ring_module(ring));
        }
        Self::new(ring, k, vec![])
    }

    /// `R` itself; element ids coincide with ring elements.
    pub fn ring_module(ring: &Arc<FiniteRing>) -> Self {
        let ids: Vec<u32> = (0..ring.size() as u32).collect();
        FinModule { ring: ring.clone(), gens: 1, relations: vec![], class_of: ids.clone(), reps: ids }
    }

    pub fn zero(ring: &Arc<FiniteRing>) -> Self {
        Self::new(ring, 0, vec![]).expect("trivial")
    }

    /// `R / I` for the ideal generated by `gens`.
    pub fn cyclic(ring: &Arc<FiniteRing>, gens: &[u8]) -> Result<Self> {
        Self::new(ring, 1, gens.iter().map(|&g| vec![g]).collect())
    }

    /// `R / J` with `J` the Jacobson radical; the residue field over a local ring.
    pub fn residue(ring: &Arc<FiniteRing>) -> Self {
        let rad = ring.ideal_elements(ring.radical());
        Self::cyclic(ring, &rad).expect("one generator")
    }

    pub fn ring(&self) -> &Arc<FiniteRing> {
        &self.ring
    }

    pub fn gens(&self) -> usize {
        self.gens
    }

    pub fn relations(&self) -> &[Vec<u8>] {
        &self.relations
    }

    pub fn size(&self) -> usize {
        self.reps.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.reps.len() as u32
    }

    /// Canonical representative in `R^g`.
    pub fn vector(&self, a: u32) -> Vec<u8> {
        decode(self.reps[a as usize], self.ring.size(), self.gens)
    }

    pub fn class(&self, v: &[u8]) -> u32 {
        self.class_of[encode(v, self.ring.size()) as usize]
    }

    pub fn generator(&self, i: usize) -> u32 {
        let mut v = vec![0; self.gens];
        v[i] = self.ring.one();
        self.class(&v)
    }

    pub fn add_el(&self, a: u32, b: u32) -> u32 {
        if a == 0 {
            return b;
        }
        if b == 0 {
            return a;
        }
        let (va, vb) = (self.vector(a), self.vector(b));
        let w: Vec<u8> = va.iter().zip(&vb).map(|(&x, &y)| self.ring.add(x, y)).collect();
        self.class(&w)
    }

    pub fn smul_el(&self, r: u8, a: u32) -> u32 {
        if a == 0 || r == 0 {
            return 0;
        }
        let w: Vec<u8> = self.vector(a).iter().map(|&x| self.ring.mul(r, x)).collect();
        self.class(&w)
    }

    /// `Σ c_i x_i`.
    pub fn combine(&self, coeffs: &[u8], elems: &[u32]) -> u32 {
        coeffs.iter().zip(elems).fold(0, |acc, (&c, &x)| self.add_el(acc, self.smul_el(c, x)))
    }

    /// Class of the vector `v ∈ R^g` pushed along the standard cover.
    pub fn from_vector(&self, v: &[u8]) -> u32 {
        self.class(v)
    }

    pub fn direct_sum(&self, o: &FinModule) -> Result<FinModule> {
        let g = self.gens + o.gens;
        let mut rels = Vec::new();
        for r in &self.relations {
            let mut v = r.clone();
            v.resize(g, 0);
            rels.push(v);
        }
        for r in &o.relations {
            let mut v = vec![0; self.gens];
            v.extend(r);
            rels.push(v);
        }
        FinModule::new(&self.ring, g, rels)
    }

    /// Homomorphisms to `n`, as images of the generators.
    pub fn homs(&self, n: &FinModule) -> Result<Vec<Vec<u32>>> {
        let p = Power::new(n, self.gens);
        let rel = RMat::from_cols(self.gens, &self.relations).transpose();
        Ok(p.all()?.into_iter().filter(|y| rel.apply(n, y).iter().all(|&z| z == 0)).collect())
    }

    /// Image of the map given by generator images.
    pub fn image_of(&self, n: &FinModule, images: &[u32]) -> Vec<u32> {
        span(n, images)
    }

    /// Value of the map given by generator images on the element `a`.
    pub fn apply_hom(&self, n: &FinModule, images: &[u32], a: u32) -> u32 {
        n.combine(&self.vector(a), images)
    }

    /// `|{m : r m = 0}|` for every ring element `r`.
    pub fn fingerprint(&self) -> Vec<usize> {
        let mut fp = vec![self.size()];
        for r in self.ring.elements() {
            fp.push(self.elements().filter(|&m| self.smul_el(r, m) == 0).count());
        }
        fp
    }

    /// Equal size plus a surjective homomorphism.
    pub fn is_isomorphic(&self, o: &FinModule) -> Result<bool> {
        if self.fingerprint() != o.fingerprint() {
            return Ok(false);
        }
        if self.size() == 1 {
            return Ok(true);
        }
        let min_self = minimal_generators(self, &self.elements().collect::<Vec<_>>());
        let pres = self.presentation_on(&min_self)?;
        for h in pres.homs(o)? {
            if span(o, &h).len() == o.size() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The same module presented on the given generators.
    pub fn presentation_on(&self, gens: &[u32]) -> Result<FinModule> {
        let free = Power::free(&self.ring, gens.len());
        let kernel: Vec<Vec<u32>> = free
            .all()?
            .into_iter()
            .filter(|x| self.combine(&x.iter().map(|&c| c as u8).collect::<Vec<_>>(), gens) == 0)
            .collect();
        let rels = minimal_generators(&free, &kernel);
        let out = FinModule::new(&self.ring, gens.len(), rels.iter().map(|r| r.iter().map(|&c| c as u8).collect()).collect())?;
        if out.size() != self.size() {
            return Err(LabError::Certificate("given elements do not generate the module".into()));
        }
        Ok(out)
    }

    pub fn describe(&self) -> String {
        if self.gens == 0 {
            return "0".into();
        }
        let name = |v: &Vec<u8>| -> String {
            let parts: Vec<String> = v.iter().map(|&x| self.ring.element_name(x)).collect();
            format!("({})", parts.join(","))
        };
        let base = if self.gens == 1 { "R".to_string() } else { format!("R^{}", self.gens) };
        if self.relations.is_empty() {
            base
        } else {
            let rels: Vec<String> = self.relations.iter().map(name).collect();
            format!("{base}/<{}>", rels.join(","))
        }
    }
}

impl Carrier for FinModule {
    type Elem = u32;
    fn ring(&self) -> &FiniteRing {
        &self.ring
    }
    fn zero(&self) -> u32 {
        0
    }
    fn add(&self, a: &u32, b: &u32) -> u32 {
        self.add_el(*a, *b)
    }
    fn smul(&self, r: u8, a: &u32) -> u32 {
        self.smul_el(r, *a)
    }
}

impl RMat {
    pub fn transpose(&self) -> RMat {
        let mut m = RMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j));
            }
        }
        m
    }
}

fn decode(mut code: u32, q: usize, len: usize) -> Vec<u8> {
    let mut v = vec![0u8; len];
    for x in v.iter_mut() {
        *x = (code % q as u32) as u8;
        code /= q as u32;
    }
    v
}

fn encode(v: &[u8], q: usize) -> u32 {
    v.iter().rev().fold(0u32, |acc, &x| acc * q as u32 + x as u32)
}

/// `M^k` with componentwise operations.
#[derive(Clone)]
pub struct Power<'a> {
    base: std::borrow::Cow<'a, FinModule>,
    k: usize,
}

impl<'a> Power<'a> {
    pub fn new(base: &'a FinModule, k: usize) -> Self {
        Power { base: std::borrow::Cow::Borrowed(base), k }
    }

    /// `R^k`; element components are ring elements.
    pub fn free(ring: &Arc<FiniteRing>, k: usize) -> Power<'static> {
        Power { base: std::borrow::Cow::Owned(FinModule::ring_module(ring)), k }
    }

    pub fn base(&self) -> &FinModule {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn size(&self) -> Option<usize> {
        self.base.size().checked_pow(self.k as u32)
    }

    /// Every element, in lexicographic order.
    pub fn all(&self) -> Result<Vec<Vec<u32>>> {
        let s = self.base.size();
        let total = self
            .size()
            .filter(|&t| t <= ENUM_LIMIT)
            .ok_or_else(|| LabError::TooLarge(format!("{s}^{} elements", self.k)))?;
        Ok((0..total)
            .map(|mut c| {
                let mut v = vec![0u32; self.k];
                for x in v.iter_mut().rev() {
                    *x = (c % s) as u32;
                    c /= s;
                }
                v
            })
            .collect())
    }
}

impl Carrier for Power<'_> {
    type Elem = Vec<u32>;
    fn ring(&self) -> &FiniteRing {
        &self.base.ring
    }
    fn zero(&self) -> Vec<u32> {
        vec![0; self.k]
    }
    fn add(&self, a: &Vec<u32>, b: &Vec<u32>) -> Vec<u32> {
        a.iter().zip(b).map(|(&x, &y)| self.base.add_el(x, y)).collect()
    }
    fn smul(&self, r: u8, a: &Vec<u32>) -> Vec<u32> {
        a.iter().map(|&x| self.base.smul_el(r, x)).collect()
    }
}

/// Module mini-language: summands joined by `|`, each one of `zero`, `R`,
/// `R^k`, `k` (residue field), `quot:a,b,..` (`R/(a,b,..)`) or
/// `pres:g:r;r;..` with each relation a comma-separated vector.
pub fn parse_module(ring: &Arc<FiniteRing>, spec: &str) -> Result<FinModule> {
    let mut out: Option<FinModule> = None;
    for part in spec.split('|') {
        let part = part.trim();
        let m = if part == "zero" || part == "0" {
            FinModule::zero(ring)
        } else if part == "R" {
            FinModule::free(ring, 1)?
        } else if let Some(k) = part.strip_prefix("R^") {
            let k: usize = k.parse().map_err(|_| LabError::Parse(format!("bad rank in `{part}`")))?;
            FinModule::free(ring, k)?
        } else if part == "k" {
            FinModule::residue(ring)
        } else if let Some(list) = part.strip_prefix("quot:") {
            let gens: Vec<u8> = list.split(',').map(|e| ring.parse_element(e)).collect::<Result<_>>()?;
            FinModule::cyclic(ring, &gens)?
        } else if let Some(rest) = part.strip_prefix("pres:") {
            let (g, rels) = rest.split_once(':').unwrap_or((rest, ""));
            let g: usize = g.parse().map_err(|_| LabError::Parse(format!("bad generator count in `{part}`")))?;
            let rels: Vec<Vec<u8>> = rels
                .split(';')
                .filter(|r| !r.trim().is_empty())
                .map(|r| r.split(',').map(|e| ring.parse_element(e)).collect::<Result<Vec<u8>>>())
                .collect::<Result<_>>()?;
            FinModule::new(ring, g, rels)?
        } else {
            return Err(LabError::Parse(format!("unknown module `{part}`")));
        };
        out = Some(match out {
            None => m,
            Some(prev) => prev.direct_sum(&m)?,
        });
    }
    out.ok_or_else(|| LabError::Parse("empty module spec".into()))
}
