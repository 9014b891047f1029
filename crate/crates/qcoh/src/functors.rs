//! Evaluation at a vertex, its right adjoint `D^v`, the adjunction bijection
//! on morphisms, and the support decomposition sequence.
//!
//! Morphisms are graded by a multidegree `E`: a morphism of degree `E` sends
//! the slice at `D` to the slice at `D + E`. The value of `M` at `w` is
//! generated by `x_k^{b_j} e_j` (`k = min w`), so a morphism is stored by the
//! images of these generators together with its matrices on window slices.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{Matrix, QuotientSpace};
use crate::quiver::{
    coker_sections, enumerate_exponents, maximal, supp_report, vertices, GradedFamily, Grading, MultiDegree,
    QuiverError, Result, Slice, SliceKey, TwistPresentation, Vertex,
};
use crate::scalar::Field;

/// `H^v(M) = M(v)`.
pub fn evaluate<F: Field>(p: &TwistPresentation<F>, v: &Vertex, w: usize) -> Result<GradedFamily<F>> {
    coker_sections(p, v, w)
}

fn require_monomial<F: Field>(p: &TwistPresentation<F>, what: &str) -> Result<()> {
    if p.is_monomial() {
        Ok(())
    } else {
        Err(QuiverError::Unsupported(format!("{what} is not of monomial type")))
    }
}

fn require_chart_inside<F: Field>(n: &TwistPresentation<F>, v: &Vertex) -> Result<()> {
    match n.chart() {
        Some(c) if !c.is_subset(v) => Err(QuiverError::NotSubset(c.to_string(), v.to_string())),
        _ => Ok(()),
    }
}

/// `D^v(N)(w) = N ⊗ R(v ∪ w)`, i.e. `N` evaluated over `v ∪ w`.
pub fn dv_sections<F: Field>(v: &Vertex, module: &TwistPresentation<F>, w: &Vertex, window: usize) -> Result<GradedFamily<F>> {
    require_monomial(module, "N")?;
    require_chart_inside(module, v)?;
    coker_sections(module, &v.union(w), window)
}

/// `D^v(N)` at every vertex.
#[derive(Clone, Debug)]
pub struct DvValue<F> {
    pub base: Vertex,
    pub window: usize,
    pub values: BTreeMap<Vertex, GradedFamily<F>>,
}

impl<F: Field> DvValue<F> {
    pub fn build(v: &Vertex, module: &TwistPresentation<F>, window: usize) -> Result<Self> {
        let mut values = BTreeMap::new();
        for w in vertices(v.n()) {
            values.insert(w, dv_sections(v, module, &w, window)?);
        }
        Ok(DvValue { base: *v, window, values })
    }

    /// The value at `w` coincides with the value at `v ∪ w`.
    pub fn check_idempotent(&self) -> bool {
        self.values.iter().all(|(w, fam)| fam.dims() == self.values[&self.base.union(w)].dims())
    }
}

/// `ψ : M(v) → N` of degree `E`, stored by generator images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleMorphism<F> {
    pub vertex: Vertex,
    pub degree: MultiDegree,
    /// Coordinates of `ψ(x_k^{b_j} e_j)` in the slice of `N` at `γ_j(v) + E`.
    pub images: Vec<Vec<F>>,
    /// Matrices on the window slices of `M(v)`, keyed by slice.
    pub slices: Vec<(SliceKey, Matrix<F>)>,
}

/// `f : M → D^v(N)` of degree `E`, stored by generator images at every vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismData<F> {
    pub base: Vertex,
    pub degree: MultiDegree,
    pub images: BTreeMap<Vertex, Vec<Vec<F>>>,
    pub slices: BTreeMap<Vertex, Vec<(SliceKey, Matrix<F>)>>,
}

/// Degree-`E` morphisms out of `M` into `D^v(N)` and out of `M(v)` into `N`.
pub struct HomProblem<'a, F> {
    m: &'a TwistPresentation<F>,
    target: &'a TwistPresentation<F>,
    base: Vertex,
    window: usize,
    degree: MultiDegree,
}

impl<'a, F: Field> HomProblem<'a, F> {
    pub fn new(
        m: &'a TwistPresentation<F>,
        base: Vertex,
        target: &'a TwistPresentation<F>,
        degree: MultiDegree,
        window: usize,
    ) -> Result<Self> {
        require_monomial(m, "M")?;
        require_monomial(target, "N")?;
        require_chart_inside(target, &base)?;
        if m.chart().is_some() {
            return Err(QuiverError::Unsupported("M must be a sheaf presentation".into()));
        }
        if m.n() != target.n() || base.n() != m.n() || degree.0.len() != m.n() + 1 {
            return Err(QuiverError::Presentation("mismatched n".into()));
        }
        Ok(HomProblem { m, target, base, window, degree })
    }

    pub fn degree(&self) -> &MultiDegree {
        &self.degree
    }

    /// Slice of `N` holding the image of generator `j` at `w`.
    fn image_slice(&self, w: &Vertex, j: usize) -> Result<Slice<F>> {
        let g = self.m.generator_degree(j, w).expect("monomial");
        self.target.slice(&self.base.union(w), &SliceKey::Fine(g.add(&self.degree)), self.window)
    }

    fn image_slices(&self, w: &Vertex) -> Result<Vec<Slice<F>>> {
        (0..self.m.targets().len()).map(|j| self.image_slice(w, j)).collect()
    }

    /// Linear conditions imposed by the relations of `M(w)` on the images at `w`.
    fn relation_rows(&self, w: &Vertex, slices: &[Slice<F>]) -> Result<Vec<Matrix<F>>> {
        let Grading::Fine { source_shift, .. } = self.m.grading() else { unreachable!() };
        let u = self.base.union(w);
        let k = Vertex::min(w);
        let mut out = Vec::new();
        for (i, rel) in self.m.relations_at(w).into_iter().enumerate() {
            if rel.is_empty() {
                continue;
            }
            let a = self.m.sources()[i];
            let deg = source_shift[i].add(&MultiDegree::unit(self.m.n(), k).scale(a)).add(&self.degree);
            let r = self.target.slice(&u, &SliceKey::Fine(deg), self.window)?;
            let mut blocks: Vec<Matrix<F>> = slices.iter().map(|s| Matrix::zeros(r.dim(), s.dim())).collect();
            for (j, c, rho) in rel {
                let mult = slices[j].multiply_to(&r, &rho)?;
                let mut b = Matrix::zeros(r.dim(), slices[j].dim());
                for x in 0..r.dim() {
                    for y in 0..slices[j].dim() {
                        b.set(x, y, blocks[j].get(x, y).clone() + c.clone() * mult.get(x, y).clone());
                    }
                }
                blocks[j] = b;
            }
            out.push(hcat(&blocks, r.dim()));
        }
        Ok(out)
    }

    /// Basis (as columns) of `Hom_E(M(v), N)` in generator-image coordinates.
    pub fn module_hom_basis(&self) -> Result<(Vec<usize>, Matrix<F>)> {
        let slices = self.image_slices(&self.base)?;
        let sizes: Vec<usize> = slices.iter().map(|s| s.dim()).collect();
        let total = sizes.iter().sum();
        let rows = self.relation_rows(&self.base, &slices)?;
        Ok((sizes, kernel_of_rows(rows, total)?))
    }

    fn sheaf_layout(&self) -> Result<(Vec<Vertex>, Vec<Vec<Slice<F>>>, Vec<usize>, usize)> {
        let vs = vertices(self.m.n());
        let slices: Vec<Vec<Slice<F>>> = vs.iter().map(|w| self.image_slices(w)).collect::<Result<_>>()?;
        let mut offsets = Vec::with_capacity(vs.len());
        let mut total = 0;
        for s in &slices {
            offsets.push(total);
            total += s.iter().map(|x| x.dim()).sum::<usize>();
        }
        Ok((vs, slices, offsets, total))
    }

    /// Basis of compatible families of generator images, i.e. `Hom_E(M, D^v(N))`.
    pub fn sheaf_hom_basis(&self) -> Result<Matrix<F>> {
        let (vs, slices, offsets, total) = self.sheaf_layout()?;
        let mut rows: Vec<Matrix<F>> = Vec::new();
        for (wi, w) in vs.iter().enumerate() {
            for r in self.relation_rows(w, &slices[wi])? {
                rows.push(place(&r, offsets[wi], total));
            }
        }
        for (wi, w) in vs.iter().enumerate() {
            for (wj, w2) in vs.iter().enumerate() {
                if !(w.is_subset(w2) && w2.len() == w.len() + 1) {
                    continue;
                }
                let (k, k2) = (Vertex::min(w), Vertex::min(w2));
                let mut inner_w = 0;
                let mut inner_w2 = 0;
                for (j, &b) in self.m.targets().iter().enumerate() {
                    let s = &slices[wi][j];
                    let s2 = &slices[wj][j];
                    let here = self
                        .target
                        .slice(&self.base.union(w2), &s.key, self.window)?;
                    let res = s.restrict_to(&here)?;
                    let shift = MultiDegree::unit(self.m.n(), k).sub(&MultiDegree::unit(self.m.n(), k2)).scale(b);
                    let mult = s2.multiply_to(&here, &shift)?;
                    let mut row = Matrix::zeros(here.dim(), total);
                    for x in 0..here.dim() {
                        for y in 0..s.dim() {
                            row.set(x, offsets[wi] + inner_w + y, res.get(x, y).clone());
                        }
                        for y in 0..s2.dim() {
                            let cur = row.get(x, offsets[wj] + inner_w2 + y).clone();
                            row.set(x, offsets[wj] + inner_w2 + y, cur - mult.get(x, y).clone());
                        }
                    }
                    rows.push(row);
                    inner_w += s.dim();
                    inner_w2 += s2.dim();
                }
            }
        }
        kernel_of_rows(rows, total)
    }

    /// Matrices of the map with the given generator images on the window slices of `M(w)`.
    fn slice_matrices(&self, w: &Vertex, images: &[Vec<F>], slices: &[Slice<F>]) -> Result<Vec<(SliceKey, Matrix<F>)>> {
        let fam = coker_sections(self.m, w, self.window)?;
        let u = self.base.union(w);
        let mut out = Vec::new();
        for s in &fam.slices {
            let SliceKey::Fine(d) = &s.key else { unreachable!() };
            let to = self.target.slice(&u, &SliceKey::Fine(d.add(&self.degree)), self.window)?;
            let m = s.map_to(&to, |l| {
                let shift = l.exp.sub(&self.m.generator_exp(l.gen, w));
                slices[l.gen]
                    .terms_of(&images[l.gen])
                    .into_iter()
                    .map(|(c, t)| (c, crate::quiver::Label { gen: t.gen, exp: t.exp.add(&shift) }))
                    .collect()
            })?;
            out.push((s.key.clone(), m));
        }
        Ok(out)
    }

    fn split(&self, vec: &[F], sizes: &[usize]) -> Vec<Vec<F>> {
        let mut out = Vec::new();
        let mut at = 0;
        for &s in sizes {
            out.push(vec[at..at + s].to_vec());
            at += s;
        }
        out
    }

    /// Module morphism with generator images given as one stacked vector.
    pub fn module_morphism(&self, vec: &[F]) -> Result<ModuleMorphism<F>> {
        let slices = self.image_slices(&self.base)?;
        let sizes: Vec<usize> = slices.iter().map(|s| s.dim()).collect();
        let images = self.split(vec, &sizes);
        let rows = self.relation_rows(&self.base, &slices)?;
        for r in &rows {
            if !r.mul_vec(vec)?.iter().all(|x| x.is_zero()) {
                return Err(QuiverError::Certificate("generator images violate a relation".into()));
            }
        }
        let sl = self.slice_matrices(&self.base, &images, &slices)?;
        Ok(ModuleMorphism { vertex: self.base, degree: self.degree.clone(), images, slices: sl })
    }

    /// Sheaf morphism with generator images at all vertices as one stacked vector.
    pub fn sheaf_morphism(&self, vec: &[F]) -> Result<MorphismData<F>> {
        let (vs, slices, offsets, _) = self.sheaf_layout()?;
        let mut images = BTreeMap::new();
        let mut sl = BTreeMap::new();
        for (wi, w) in vs.iter().enumerate() {
            let sizes: Vec<usize> = slices[wi].iter().map(|s| s.dim()).collect();
            let len: usize = sizes.iter().sum();
            let imgs = self.split(&vec[offsets[wi]..offsets[wi] + len], &sizes);
            sl.insert(*w, self.slice_matrices(w, &imgs, &slices[wi])?);
            images.insert(*w, imgs);
        }
        let f = MorphismData { base: self.base, degree: self.degree.clone(), images, slices: sl };
        self.check_commutes(&f)?;
        Ok(f)
    }

    /// `f_{w'} ∘ res = res ∘ f_w` on every window slice and every inclusion.
    pub fn check_commutes(&self, f: &MorphismData<F>) -> Result<()> {
        let vs = vertices(self.m.n());
        for w in &vs {
            let fam = coker_sections(self.m, w, self.window)?;
            for w2 in vs.iter().filter(|w2| w.is_subset(w2) && *w2 != w) {
                let fam2 = coker_sections(self.m, w2, self.window)?;
                for (key, fm) in &f.slices[w] {
                    let (Some(s), Some(s2)) = (fam.get(key), fam2.get(key)) else { continue };
                    let Some((_, fm2)) = f.slices[w2].iter().find(|(k, _)| k == key) else { continue };
                    let SliceKey::Fine(d) = key else { unreachable!() };
                    let tkey = SliceKey::Fine(d.add(&self.degree));
                    let t = self.target.slice(&self.base.union(w), &tkey, self.window)?;
                    let t2 = self.target.slice(&self.base.union(w2), &tkey, self.window)?;
                    let left = fm2.mul(&s.restrict_to(s2)?)?;
                    let right = t.restrict_to(&t2)?.mul(fm)?;
                    if left != right {
                        return Err(QuiverError::Certificate(format!(
                            "morphism does not commute with restriction {w}→{w2} at {key}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `f ↦ f_v`.
    pub fn adjoint_transpose(&self, f: &MorphismData<F>) -> Result<ModuleMorphism<F>> {
        self.check_commutes(f)?;
        let images = f.images[&self.base].clone();
        let vec: Vec<F> = images.iter().flatten().cloned().collect();
        self.module_morphism(&vec)
    }

    /// `ψ ↦ (w ↦ res_{v→v∪w} ∘ ψ)`, rewritten on the generators at `w`.
    pub fn inverse_transpose(&self, psi: &ModuleMorphism<F>) -> Result<MorphismData<F>> {
        let (vs, slices, _, total) = self.sheaf_layout()?;
        let base_slices = self.image_slices(&self.base)?;
        let kv = Vertex::min(&self.base);
        let mut vec = Vec::with_capacity(total);
        for (wi, w) in vs.iter().enumerate() {
            let k = Vertex::min(w);
            for (j, &b) in self.m.targets().iter().enumerate() {
                let shift = MultiDegree::unit(self.m.n(), k).sub(&MultiDegree::unit(self.m.n(), kv)).scale(b);
                let terms: Vec<_> = base_slices[j]
                    .terms_of(&psi.images[j])
                    .into_iter()
                    .map(|(c, l)| (c, crate::quiver::Label { gen: l.gen, exp: l.exp.add(&shift) }))
                    .collect();
                vec.extend(slices[wi][j].class_of(&terms)?);
            }
        }
        self.sheaf_morphism(&vec)
    }

    /// Image of the identity of `M(v)` when `N` presents `M` itself: the unit
    /// `M → D^v(M(v))` (restriction maps).
    pub fn unit(&self) -> Result<MorphismData<F>> {
        if self.target.targets() != self.m.targets() || !self.degree.0.iter().all(|&x| x == 0) {
            return Err(QuiverError::Unsupported("the unit needs N = M and degree 0".into()));
        }
        let slices = self.image_slices(&self.base)?;
        let mut vec = Vec::new();
        for (j, s) in slices.iter().enumerate() {
            let gen = crate::quiver::Label { gen: j, exp: self.m.generator_exp(j, &self.base) };
            vec.extend(s.class_of(&[(F::one(), gen)])?);
        }
        self.inverse_transpose(&self.module_morphism(&vec)?)
    }
}

fn hcat<F: Field>(blocks: &[Matrix<F>], rows: usize) -> Matrix<F> {
    let mut out = Matrix::zeros(rows, 0);
    for b in blocks {
        out = out.hstack(b).expect("row counts agree");
    }
    out
}

fn place<F: Field>(m: &Matrix<F>, offset: usize, total: usize) -> Matrix<F> {
    let mut out = Matrix::zeros(m.rows(), total);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(i, offset + j, m.get(i, j).clone());
        }
    }
    out
}

fn kernel_of_rows<F: Field>(rows: Vec<Matrix<F>>, total: usize) -> Result<Matrix<F>> {
    let mut all = Matrix::zeros(0, total);
    for r in rows {
        all = all.vstack(&r)?;
    }
    if all.rows() == 0 {
        return Ok(Matrix::identity(total));
    }
    Ok(all.kernel_basis())
}

/// Degrees `E` with `|E_i| ≤ W` for which a nonzero degree-`E` map can exist.
pub fn candidate_degrees<F: Field>(m: &TwistPresentation<F>, target: &TwistPresentation<F>, window: usize) -> Vec<MultiDegree> {
    let total = |p: &TwistPresentation<F>, j: usize| p.targets()[j] + p.target_shift(j).map_or(0, |s| s.total());
    let mut sums: Vec<i64> = Vec::new();
    for j in 0..m.targets().len() {
        for l in 0..target.targets().len() {
            sums.push(total(target, l) - total(m, j));
        }
    }
    sums.sort();
    sums.dedup();
    sums.into_iter().flat_map(|s| enumerate_exponents(m.n(), s, window, None)).collect()
}

/// Dimensions of `Hom_E(M, D^v(N))` and `Hom_E(M(v), N)` for one degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomSliceDim {
    pub degree: MultiDegree,
    pub sheaf_side: usize,
    pub module_side: usize,
}

/// Compares both sides of the adjunction isomorphism degree by degree (Hom level only).
pub fn ext_against_dv<F: Field>(
    p: &TwistPresentation<F>,
    v: &Vertex,
    module: &TwistPresentation<F>,
    window: usize,
    i: usize,
) -> Result<Vec<HomSliceDim>> {
    if i > 0 {
        return Err(QuiverError::Unsupported(format!("Ext^{i} against D^v; only i = 0 is computed")));
    }
    let degrees = candidate_degrees(p, module, window);
    let rows: Vec<Option<HomSliceDim>> = degrees
        .par_iter()
        .map(|e| {
            let prob = HomProblem::new(p, *v, module, e.clone(), window)?;
            let sheaf_side = prob.sheaf_hom_basis()?.cols();
            let module_side = prob.module_hom_basis()?.1.cols();
            Ok((sheaf_side + module_side > 0).then(|| HomSliceDim { degree: e.clone(), sheaf_side, module_side }))
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Outcome of round-tripping random morphisms through the adjunction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjunctionReport {
    pub base: Vertex,
    pub window: usize,
    pub degrees: usize,
    pub morphisms: usize,
    pub failures: Vec<String>,
}

fn random_combination<F: Field>(basis: &Matrix<F>, rng: &mut ChaCha8Rng) -> Vec<F> {
    let coeffs: Vec<F> = (0..basis.cols()).map(|_| F::from_i64(rng.gen_range(-3..=3))).collect();
    basis.mul_vec(&coeffs).expect("shape")
}

/// For every degree with nonzero Hom, checks `inverse ∘ transpose = id` on
/// random sheaf morphisms and `transpose ∘ inverse = id` on random module
/// morphisms, `samples` of each.
pub fn adjunction_round_trips<F: Field>(
    p: &TwistPresentation<F>,
    v: &Vertex,
    module: &TwistPresentation<F>,
    window: usize,
    samples: usize,
    seed: u64,
) -> Result<AdjunctionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AdjunctionReport { base: *v, window, degrees: 0, morphisms: 0, failures: vec![] };
    for e in candidate_degrees(p, module, window) {
        let prob = HomProblem::new(p, *v, module, e.clone(), window)?;
        let sheaf = prob.sheaf_hom_basis()?;
        let (_, modb) = prob.module_hom_basis()?;
        if sheaf.cols() == 0 && modb.cols() == 0 {
            continue;
        }
        report.degrees += 1;
        if sheaf.cols() != modb.cols() {
            report.failures.push(format!("degree {e}: dim Hom {} vs {}", sheaf.cols(), modb.cols()));
        }
        for s in 0..samples {
            let f = prob.sheaf_morphism(&random_combination(&sheaf, &mut rng))?;
            let back = prob.inverse_transpose(&prob.adjoint_transpose(&f)?)?;
            if back != f {
                report.failures.push(format!("degree {e}: sheaf morphism {s} does not round-trip"));
            }
            let psi = prob.module_morphism(&random_combination(&modb, &mut rng))?;
            let again = prob.adjoint_transpose(&prob.inverse_transpose(&psi)?)?;
            if again != psi {
                report.failures.push(format!("degree {e}: module morphism {s} does not round-trip"));
            }
            report.morphisms += 2;
        }
    }
    Ok(report)
}

/// Dimensions of the four terms over one vertex and slice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionSlice {
    pub vertex: Vertex,
    pub key: String,
    pub kernel: usize,
    pub module: usize,
    pub middle: usize,
    pub cokernel: usize,
}

/// `0 → K → M → ⊕_{v∈B} D^v(M(v)) → C → 0` with its certificates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub window: usize,
    pub support: Vec<Vertex>,
    pub support_stable: bool,
    pub maximal: Vec<Vertex>,
    pub kernel_support: Vec<Vertex>,
    pub cokernel_support: Vec<Vertex>,
    /// Every slice of the sequence passed the exactness certificate.
    pub exact: bool,
    /// `Supp(K)` and `Supp(C)` are proper subsets of `Supp(M)`.
    pub strict: bool,
    pub slices: Vec<DecompositionSlice>,
}

impl Decomposition {
    /// `K = C = 0`: the unit map is an isomorphism.
    pub fn unit_is_iso(&self) -> bool {
        self.kernel_support.is_empty() && self.cokernel_support.is_empty()
    }
}

/// Exactness of `0 → ker u → M → Mid → coker u → 0` checked with explicit maps.
fn certify_four_term<F: Field>(u: &Matrix<F>) -> Result<(usize, usize)> {
    let kappa = u.kernel_basis();
    let image = QuotientSpace::new(u.rows(), u)?;
    let ok_kernel = u.mul(&kappa)?.is_zero() && kappa.rank() == kappa.cols();
    let exact_at_m = kappa.cols() + u.rank() == u.cols();
    let ok_coker = (0..u.cols()).all(|c| image.contains(&u.column(c)));
    let exact_at_mid = image.dim() + u.rank() == u.rows();
    if ok_kernel && exact_at_m && ok_coker && exact_at_mid {
        Ok((kappa.cols(), image.dim()))
    } else {
        Err(QuiverError::Certificate("four-term sequence is not exact".into()))
    }
}

/// Support decomposition with `N_v = M(v)` for every maximal vertex `v`.
pub fn decomposition_sequence<F: Field>(p: &TwistPresentation<F>, window: usize) -> Result<Decomposition> {
    let sr = supp_report(p, window)?;
    if sr.vertices.is_empty() {
        return Err(QuiverError::ZeroModule);
    }
    let b = maximal(&sr.vertices);
    let keys = p.window_keys(window);
    let vs = vertices(p.n());
    let jobs: Vec<(Vertex, SliceKey)> = vs.iter().flat_map(|w| keys.iter().map(move |k| (*w, k.clone()))).collect();
    let slices: Vec<Option<DecompositionSlice>> = jobs
        .par_iter()
        .map(|(w, key)| {
            let s = p.slice(w, key, window)?;
            let mids: Vec<Slice<F>> = b.iter().map(|v| p.slice(&v.union(w), key, window)).collect::<Result<_>>()?;
            let middle: usize = mids.iter().map(|m| m.dim()).sum();
            if s.dim() == 0 && middle == 0 {
                return Ok(None);
            }
            let mut u = Matrix::zeros(0, s.dim());
            for m in &mids {
                u = u.vstack(&s.restrict_to(m)?)?;
            }
            let (kernel, cokernel) = certify_four_term(&u)?;
            Ok(Some(DecompositionSlice { vertex: *w, key: key.to_string(), kernel, module: s.dim(), middle, cokernel }))
        })
        .collect::<Result<_>>()?;
    let slices: Vec<DecompositionSlice> = slices.into_iter().flatten().collect();
    let collect = |f: fn(&DecompositionSlice) -> usize| -> Vec<Vertex> {
        vs.iter().filter(|w| slices.iter().any(|s| s.vertex == **w && f(s) > 0)).copied().collect()
    };
    let kernel_support = collect(|s| s.kernel);
    let cokernel_support = collect(|s| s.cokernel);
    let proper = |x: &[Vertex]| x.iter().all(|v| sr.vertices.contains(v)) && x.len() < sr.vertices.len();
    Ok(Decomposition {
        window,
        strict: proper(&kernel_support) && proper(&cokernel_support),
        exact: true,
        support: sr.vertices,
        support_stable: sr.stable,
        maximal: b,
        kernel_support,
        cokernel_support,
        slices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::{supp, Term};
    use num_rational::BigRational;

    type Q = BigRational;

    fn md(v: &[i64]) -> MultiDegree {
        MultiDegree(v.to_vec())
    }

    fn vx(n: usize, m: &[usize]) -> Vertex {
        Vertex::new(n, m).unwrap()
    }

    fn mono(n: usize, targets: Vec<i64>, sources: Vec<i64>, cells: &[(usize, usize, &[i64])]) -> TwistPresentation<Q> {
        let mut entries = vec![vec![Vec::new(); sources.len()]; targets.len()];
        for &(j, i, e) in cells {
            entries[j][i].push(Term { coef: Q::from_i64(1), exp: md(e) });
        }
        TwistPresentation::new(n, targets, sources, entries, None).unwrap()
    }

    fn skyscraper() -> TwistPresentation<Q> {
        mono(1, vec![0], vec![-1], &[(0, 0, &[0, 1])])
    }

    #[test]
    fn evaluate_examples() {
        let o = TwistPresentation::<Q>::twist(1, 0);
        for v in vertices(1) {
            let fam = evaluate(&o, &v, 2).unwrap();
            let sb = crate::quiver::section_basis(&v, 0, 2).unwrap();
            assert_eq!(fam.total_dim(), sb.dim());
        }
        let sky = evaluate(&skyscraper(), &vx(1, &[0]), 2).unwrap();
        let live: Vec<_> = sky.slices.iter().filter(|s| s.dim() > 0).map(|s| s.key.clone()).collect();
        assert_eq!(live, vec![SliceKey::Fine(md(&[0, 0]))]);
        assert!(evaluate(&TwistPresentation::<Q>::zero(1), &vx(1, &[1]), 2).unwrap().is_zero());
    }

    #[test]
    fn dv_examples() {
        let v = vx(1, &[0]);
        let n = TwistPresentation::<Q>::twist(1, 0).with_chart(v).unwrap();
        // w ⊆ v gives N itself
        assert_eq!(dv_sections(&v, &n, &v, 2).unwrap().dims(), evaluate(&n, &v, 2).unwrap().dims());
        // w = {1} gives the sections over {0,1}
        let d = dv_sections(&v, &n, &vx(1, &[1]), 2).unwrap();
        let full = evaluate(&TwistPresentation::<Q>::twist(1, 0), &vx(1, &[0, 1]), 2).unwrap();
        assert_eq!(d.dims(), full.dims());
        let zero = TwistPresentation::<Q>::zero(1).with_chart(v).unwrap();
        for w in vertices(1) {
            assert!(dv_sections(&v, &zero, &w, 2).unwrap().is_zero());
        }
        assert!(DvValue::build(&v, &n, 2).unwrap().check_idempotent());
    }

    #[test]
    fn dv_rejects_non_monomial_input() {
        let terms = vec![Term { coef: Q::from_i64(1), exp: md(&[1, 0]) }, Term { coef: Q::from_i64(1), exp: md(&[0, 1]) }];
        let p = TwistPresentation::new(1, vec![0], vec![-1], vec![vec![terms]], None).unwrap();
        assert!(matches!(dv_sections(&vx(1, &[0]), &p, &vx(1, &[1]), 2), Err(QuiverError::Unsupported(_))));
    }

    #[test]
    fn dv_preserves_short_exact_sequences() {
        // 0 → N(-1) --x1--> N → N/x1 → 0 over R({0}), localized at every w
        let v = vx(1, &[0]);
        let n = TwistPresentation::<Q>::twist(1, 0).with_chart(v).unwrap();
        let n1 = TwistPresentation::<Q>::twist(1, -1).with_chart(v).unwrap();
        let quot = skyscraper().with_chart(v).unwrap();
        let e1 = md(&[0, 1]);
        for w in vertices(1) {
            let u = v.union(&w);
            for key in n.keys_at(&u, 3) {
                let SliceKey::Fine(d) = &key else { unreachable!() };
                let mid = n.slice(&u, &key, 3).unwrap();
                let left = n1.slice(&u, &SliceKey::Fine(d.sub(&e1)), 3).unwrap();
                let right = quot.slice(&u, &key, 3).unwrap();
                let mult = left.multiply_to(&mid, &e1).unwrap();
                assert_eq!(mult.rank(), left.dim(), "injective at {w} {d}");
                assert_eq!(right.dim(), mid.dim() - mult.rank(), "exact at {w} {d}");
            }
        }
    }

    #[test]
    fn zero_morphism_round_trips() {
        let m = TwistPresentation::<Q>::twist(1, 0);
        let v = vx(1, &[0]);
        let prob = HomProblem::new(&m, v, &m, md(&[0, 0]), 2).unwrap();
        let total = prob.sheaf_hom_basis().unwrap().rows();
        let f = prob.sheaf_morphism(&vec![Q::from_i64(0); total]).unwrap();
        let t = prob.adjoint_transpose(&f).unwrap();
        assert!(t.images.iter().flatten().all(|x| *x == Q::from_i64(0)));
        assert_eq!(prob.inverse_transpose(&t).unwrap(), f);
    }

    #[test]
    fn unit_transposes_to_identity() {
        let m = TwistPresentation::<Q>::twist(1, 0);
        let v = vx(1, &[0]);
        let prob = HomProblem::new(&m, v, &m, md(&[0, 0]), 2).unwrap();
        let unit = prob.unit().unwrap();
        let t = prob.adjoint_transpose(&unit).unwrap();
        for (_, mat) in &t.slices {
            assert_eq!(*mat, Matrix::identity(mat.cols()));
        }
        // every component of the unit is a restriction matrix
        for (w, mats) in &unit.slices {
            let fam = evaluate(&m, w, 2).unwrap();
            for (key, mat) in mats {
                let to = m.slice(&v.union(w), key, 2).unwrap();
                assert_eq!(*mat, fam.get(key).unwrap().restrict_to(&to).unwrap());
            }
        }
    }

    #[test]
    fn unit_of_skyscraper_is_iso() {
        let m = skyscraper();
        let v = vx(1, &[0]);
        let prob = HomProblem::new(&m, v, &m, md(&[0, 0]), 3).unwrap();
        let unit = prob.unit().unwrap();
        for mats in unit.slices.values() {
            for (_, mat) in mats {
                assert_eq!(mat.rank(), mat.rows());
                assert_eq!(mat.rank(), mat.cols());
            }
        }
        assert_eq!(prob.adjoint_transpose(&unit).unwrap().slices.iter().filter(|(_, m)| m.cols() > 0).count(), 1);
    }

    #[test]
    fn non_commuting_morphism_rejected() {
        let m = TwistPresentation::<Q>::twist(1, 0);
        let v = vx(1, &[0]);
        let prob = HomProblem::new(&m, v, &m, md(&[0, 0]), 2).unwrap();
        let mut f = prob.unit().unwrap();
        let w = vx(1, &[1]);
        let imgs = f.images.get_mut(&w).unwrap();
        imgs[0][0] = imgs[0][0].clone() + Q::from_i64(1);
        let bad = prob.sheaf_morphism(&f.images.values().flatten().flatten().cloned().collect::<Vec<_>>());
        assert!(matches!(bad, Err(QuiverError::Certificate(_))));
    }

    #[test]
    fn hom_against_dv_examples() {
        for v in vertices(1) {
            let m = TwistPresentation::<Q>::twist(1, 0);
            let n = TwistPresentation::<Q>::twist(1, 0).with_chart(v).unwrap();
            let rows = ext_against_dv(&m, &v, &n, 2, 0).unwrap();
            for r in &rows {
                assert_eq!(r.sheaf_side, r.module_side);
                // Hom out of a rank-one free module is the module itself
                let slice = n.slice(&v, &SliceKey::Fine(r.degree.clone()), 2).unwrap();
                assert_eq!(r.module_side, slice.dim());
            }
            let want: usize = evaluate(&n, &v, 2).unwrap().total_dim();
            assert_eq!(rows.iter().map(|r| r.module_side).sum::<usize>(), want);

            let zero = TwistPresentation::<Q>::zero(1).with_chart(v).unwrap();
            assert!(ext_against_dv(&m, &v, &zero, 2, 0).unwrap().is_empty());
        }
        // v outside the support of the skyscraper: both sides vanish
        let v = vx(1, &[1]);
        let n = TwistPresentation::<Q>::twist(1, 0).with_chart(v).unwrap();
        assert!(ext_against_dv(&skyscraper(), &v, &n, 2, 0).unwrap().is_empty());
        assert!(matches!(ext_against_dv(&skyscraper(), &v, &n, 2, 1), Err(QuiverError::Unsupported(_))));
    }

    #[test]
    fn round_trips_on_p1() {
        let m = mono(1, vec![0, 1], vec![-1], &[(0, 0, &[1, 0])]);
        for v in vertices(1) {
            let r = adjunction_round_trips(&m, &v, &m, 2, 1, 7).unwrap();
            assert!(r.failures.is_empty(), "{:?}", r.failures);
            assert!(r.morphisms > 0);
        }
    }

    #[test]
    fn decomposition_of_skyscraper() {
        let d = decomposition_sequence(&skyscraper(), 3).unwrap();
        assert_eq!(d.maximal, vec![vx(1, &[0])]);
        assert!(d.unit_is_iso());
        assert!(d.exact && d.strict);
    }

    #[test]
    fn decomposition_rejects_zero() {
        assert!(matches!(decomposition_sequence(&TwistPresentation::<Q>::zero(1), 2), Err(QuiverError::ZeroModule)));
    }

    #[test]
    fn decomposition_of_line_in_plane() {
        // coker(O(-1) --x0--> O(0)) on P^2 is supported on {1},{2},{1,2}
        let p = mono(2, vec![0], vec![-1], &[(0, 0, &[1, 0, 0])]);
        let s = supp(&p, 2).unwrap();
        assert_eq!(s, vec![vx(2, &[1]), vx(2, &[2]), vx(2, &[1, 2])]);
        let d = decomposition_sequence(&p, 2).unwrap();
        assert_eq!(d.maximal, vec![vx(2, &[1, 2])]);
        assert!(d.kernel_support.is_empty());
        assert!(d.strict);
    }
}
