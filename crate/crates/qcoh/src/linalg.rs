//! Dense exact linear algebra: row reduction, kernels, solving, quotients and
//! cohomology of finite complexes.

use std::fmt;

use thiserror::Error;

use crate::scalar::Field;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a complex: d∘d != 0 at index {0}")]
    NotAComplex(i64),
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Field> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Builds a `rows x cols` matrix from its columns.
    pub fn from_cols(rows: usize, cols: Vec<Vec<F>>) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.into_iter().enumerate() {
            if c.len() != rows {
                return Err(LinalgError::DimensionMismatch("column length".into()));
            }
            for (i, v) in c.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| F::from_i64(v)).collect()).collect())
            .expect("ragged literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix<F>) -> Result<Matrix<F>, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j).clone() + a.clone() * b.clone();
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[F]) -> Result<Vec<F>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} * vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(F::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &Matrix<F>) -> Result<Matrix<F>, LinalgError> {
        if self.rows != other.rows {
            return Err(LinalgError::DimensionMismatch("hstack row counts".into()));
        }
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        Ok(out)
    }

    /// Places `other` below `self`.
    pub fn vstack(&self, other: &Matrix<F>) -> Result<Matrix<F>, LinalgError> {
        if self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch("vstack column counts".into()));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Matrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Matrix<F>, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m.get(r, c).inv().expect("nonzero pivot");
            for j in c..m.cols {
                let v = m.get(r, j).clone() * inv.clone();
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = m.get(i, j).clone() - f.clone() * m.get(r, j).clone();
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        self.rref().1.len()
    }

    /// Columns of the result span the kernel.
    pub fn kernel_basis(&self) -> Matrix<F> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Matrix::zeros(self.cols, free.len());
        for (idx, &f) in free.iter().enumerate() {
            k.set(f, idx, F::one());
            for (row, &p) in pivots.iter().enumerate() {
                k.set(p, idx, -r.get(row, f).clone());
            }
        }
        k
    }

    /// Some `x` with `self * x = b`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[F]) -> Result<Option<Vec<F>>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "rhs of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let bcol = Matrix::from_cols(self.rows, vec![b.to_vec()])?;
        let (r, pivots) = self.hstack(&bcol)?.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![F::zero(); self.cols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = r.get(row, self.cols).clone();
        }
        Ok(Some(x))
    }
}

impl<F: fmt::Debug> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> =
                self.data[i * self.cols..(i + 1) * self.cols].iter().map(|x| format!("{x:?}")).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// `F^ambient / span(generators)` with canonical normal forms.
///
/// The quotient basis is the set of standard basis vectors at non-pivot
/// positions of the reduced generator span.
#[derive(Clone, Debug)]
pub struct QuotientSpace<F> {
    ambient: usize,
    rows: Vec<Vec<F>>,
    pivots: Vec<usize>,
    free: Vec<usize>,
}

impl<F: Field> QuotientSpace<F> {
    /// Quotient of `F^ambient` by the column span of `gens`.
    pub fn new(ambient: usize, gens: &Matrix<F>) -> Result<Self, LinalgError> {
        if gens.rows() != ambient && gens.cols() > 0 {
            return Err(LinalgError::DimensionMismatch("generator length".into()));
        }
        let (r, pivots) = if gens.cols() == 0 { (Matrix::zeros(0, ambient), vec![]) } else { gens.transpose().rref() };
        let rows = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        let free = (0..ambient).filter(|c| !pivots.contains(c)).collect();
        Ok(QuotientSpace { ambient, rows, pivots, free })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Ambient indices of the standard vectors forming the quotient basis.
    pub fn reps(&self) -> &[usize] {
        &self.free
    }

    pub fn reduce(&self, v: &[F]) -> Vec<F> {
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let f = v[p].clone();
            if f.is_zero() {
                continue;
            }
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x = x.clone() - f.clone() * r.clone();
                }
            }
        }
        v
    }

    /// Coordinates of the class of `v` in the quotient basis.
    pub fn coords(&self, v: &[F]) -> Vec<F> {
        let r = self.reduce(v);
        self.free.iter().map(|&i| r[i].clone()).collect()
    }

    pub fn contains(&self, v: &[F]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }
}

/// A finite window of a cochain complex: `dims[k]` is the dimension of the
/// space at index `start + k`, and `diffs[k]` maps it to index `start + k + 1`.
#[derive(Clone)]
pub struct Complex<F> {
    start: i64,
    dims: Vec<usize>,
    diffs: Vec<Matrix<F>>,
}

impl<F: fmt::Debug> fmt::Debug for Complex<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Complex").field("start", &self.start).field("dims", &self.dims).field("diffs", &self.diffs).finish()
    }
}

impl<F: Field> Complex<F> {
    pub fn new(start: i64, dims: Vec<usize>, diffs: Vec<Matrix<F>>) -> Result<Self, LinalgError> {
        if diffs.len() + 1 != dims.len().max(1) {
            return Err(LinalgError::DimensionMismatch("need one differential between consecutive spaces".into()));
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.rows() != dims[k + 1] || d.cols() != dims[k] {
                return Err(LinalgError::DimensionMismatch(format!("differential at index {}", start + k as i64)));
            }
        }
        Ok(Complex { start, dims, diffs })
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.start + self.dims.len() as i64 - 1
    }

    pub fn dim(&self, i: i64) -> usize {
        self.slot(i).map_or(0, |k| self.dims[k])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn slot(&self, i: i64) -> Option<usize> {
        (i >= self.start && i <= self.end()).then(|| (i - self.start) as usize)
    }

    /// Differential out of index `i`, if both ends are stored.
    pub fn diff(&self, i: i64) -> Option<&Matrix<F>> {
        self.slot(i).and_then(|k| self.diffs.get(k))
    }

    fn rank_out(&self, i: i64) -> usize {
        self.diff(i).map_or(0, |d| d.rank())
    }

    /// Checks `d^i ∘ d^{i-1} = 0`.
    pub fn check_at(&self, i: i64) -> Result<(), LinalgError> {
        if let (Some(a), Some(b)) = (self.diff(i - 1), self.diff(i)) {
            if !b.mul(a)?.is_zero() {
                return Err(LinalgError::NotAComplex(i));
            }
        }
        Ok(())
    }

    pub fn verify(&self) -> Result<(), LinalgError> {
        for i in self.start..=self.end() {
            self.check_at(i)?;
        }
        Ok(())
    }

    /// `dim ker d^i - rank d^{i-1}`; indices outside the window are zero spaces.
    pub fn cohomology_dim(&self, i: i64) -> Result<usize, LinalgError> {
        self.check_at(i)?;
        let d = self.dim(i);
        let kernel = d - self.rank_out(i);
        Ok(kernel - self.rank_out(i - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Fp;
    use num_rational::BigRational;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    type F2 = Fp<2>;
    type F5 = Fp<5>;
    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Matrix::<F2>::identity(2).rank(), 2);
        assert_eq!(Matrix::<Q>::zeros(3, 4).rank(), 0);
        assert_eq!(Matrix::<Q>::from_i64(&[&[1, 2], &[2, 4]]).rank(), 1);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(Matrix::<Q>::identity(3).kernel_basis().cols(), 0);
        assert_eq!(Matrix::<F2>::zeros(1, 3).kernel_basis().cols(), 3);
        let k = Matrix::<F2>::from_i64(&[&[1, 1]]).kernel_basis();
        assert_eq!(k.cols(), 1);
        assert_eq!(k.column(0), vec![F2::one(), F2::one()]);
    }

    #[test]
    fn solve_examples() {
        let b = vec![q(3, 1), q(-1, 2)];
        assert_eq!(Matrix::<Q>::identity(2).solve(&b).unwrap(), Some(b.clone()));
        assert_eq!(Matrix::<Q>::zeros(2, 2).solve(&b).unwrap(), None);
        assert_eq!(Matrix::<Q>::from_i64(&[&[2]]).solve(&[q(1, 1)]).unwrap(), Some(vec![q(1, 2)]));
        assert!(Matrix::<Q>::identity(2).solve(&[q(1, 1)]).is_err());
    }

    #[test]
    fn cohomology_examples() {
        let single = Complex::<Q>::new(0, vec![1], vec![]).unwrap();
        assert_eq!(single.cohomology_dim(0).unwrap(), 1);

        let exact = Complex::<Q>::new(0, vec![1, 1], vec![Matrix::identity(1)]).unwrap();
        assert_eq!(exact.cohomology_dim(0).unwrap(), 0);
        assert_eq!(exact.cohomology_dim(1).unwrap(), 0);

        let zeros = Complex::<Q>::new(0, vec![1, 1, 1], vec![Matrix::zeros(1, 1), Matrix::zeros(1, 1)]).unwrap();
        assert_eq!(zeros.cohomology_dim(1).unwrap(), 1);
    }

    #[test]
    fn malformed_complex_rejected() {
        let bad = Complex::<Q>::new(0, vec![1, 1, 1], vec![Matrix::identity(1), Matrix::identity(1)]).unwrap();
        assert_eq!(bad.cohomology_dim(1), Err(LinalgError::NotAComplex(1)));
        assert!(bad.verify().is_err());
    }

    #[test]
    fn quotient_normal_form() {
        let gens = Matrix::<Q>::from_i64(&[&[1], &[-1], &[0]]);
        let qs = QuotientSpace::new(3, &gens).unwrap();
        assert_eq!(qs.dim(), 2);
        assert!(qs.contains(&[q(2, 1), q(-2, 1), Q::zero()]));
        assert_eq!(qs.coords(&[Q::one(), Q::zero(), Q::zero()]), qs.coords(&[Q::zero(), Q::one(), Q::zero()]));
    }

    fn f5_matrix() -> impl Strategy<Value = Matrix<F5>> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(0i64..5, r * c).prop_map(move |v| {
                Matrix::from_rows(v.chunks(c).map(|row| row.iter().map(|&x| F5::new(x)).collect()).collect())
                    .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in f5_matrix()) {
            let k = m.kernel_basis();
            prop_assert_eq!(m.rank() + k.cols(), m.cols());
            prop_assert!(m.rank() <= m.rows().min(m.cols()));
            prop_assert!(m.mul(&k).unwrap().is_zero());
        }

        #[test]
        fn solve_is_exact(m in f5_matrix(), seed in proptest::collection::vec(0i64..5, 6)) {
            let x: Vec<F5> = (0..m.cols()).map(|i| F5::new(seed[i % seed.len()])).collect();
            let b = m.mul_vec(&x).unwrap();
            let sol = m.solve(&b).unwrap().expect("consistent system");
            prop_assert_eq!(m.mul_vec(&sol).unwrap(), b);
        }

        #[test]
        fn exact_complex_has_no_cohomology(m in f5_matrix()) {
            // 0 -> ker m -> F^cols -> F^rows -> coker -> 0 restricted to the middle
            let k = m.kernel_basis();
            let c = Complex::new(0, vec![k.cols(), m.cols(), m.rows()], vec![k.clone(), m.clone()]).unwrap();
            prop_assert_eq!(c.cohomology_dim(1).unwrap(), 0);
        }
    }
}
