//! Dense complex vectors and matrices.
//!
//! Every operator in this crate is small (at most a few hundred rows in the
//! arc space, 8 rows in the reduced model), so storage is a flat row-major
//! `Vec<C64>` with no sparse formats and no external BLAS.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{invalid, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Default tolerance for structural identities (unitarity, involutions, invariance).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Default tolerance for comparing two independent computation routes.
pub const CROSS_MODE_TOL: f64 = 1e-8;

#[derive(Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<C64>,
}

impl ComplexVector {
    pub fn zeros(dim: usize) -> Self {
        Self { data: vec![ZERO; dim] }
    }

    pub fn from_vec(data: Vec<C64>) -> Result<Self> {
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("vector entries must be finite");
        }
        Ok(Self { data })
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self { data: values.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[index] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return invalid("cannot normalize the zero vector");
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;

    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.data[i]
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.iter()).finish()
    }
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return invalid(format!("expected {} entries for a {rows}x{cols} matrix, got {}", rows * cols, data.len()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("matrix entries must be finite");
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a real matrix from nested rows. Panics on ragged input.
    pub fn from_real_rows<const C: usize>(rows: &[[f64; C]]) -> Self {
        let data = rows.iter().flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0))).collect();
        Self { rows: rows.len(), cols: C, data }
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// The real plane rotation by `theta`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::from_real_rows(&[[c, -s], [s, c]])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mat_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return invalid(format!("cannot multiply {}x{} by {}x{}", self.rows, self.cols, other.rows, other.cols));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, a) in self.row(i).iter().enumerate() {
                // most operators here are permutations or block diagonal
                if *a == ZERO {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if self.cols != v.dim() {
            return invalid(format!(
                "cannot apply a {}x{} matrix to a vector of dimension {}",
                self.rows,
                self.cols,
                v.dim()
            ));
        }
        let data = (0..self.rows).map(|i| self.row(i).iter().zip(v.as_slice()).map(|(a, b)| a * b).sum()).collect();
        Ok(ComplexVector { data })
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * factor).collect() }
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Max-entry deviation of `a† a` from the identity.
    pub fn unitarity_defect(&self) -> Result<f64> {
        if !self.is_square() {
            return invalid(format!("unitarity check needs a square matrix, got {}x{}", self.rows, self.cols));
        }
        let gram = self.dagger().mat_mul(self)?;
        Ok(gram.max_abs_diff(&Self::identity(self.rows)))
    }

    /// `‖a v − λ v‖ / ‖v‖`.
    pub fn eigen_residual(&self, lambda: C64, v: &ComplexVector) -> Result<f64> {
        if !self.is_square() {
            return invalid("eigen residual needs a square matrix");
        }
        let norm = v.norm();
        if norm == 0.0 {
            return invalid("eigen residual of the zero vector is undefined");
        }
        let av = self.mat_vec(v)?;
        let r: f64 = av.as_slice().iter().zip(v.as_slice()).map(|(a, b)| (a - lambda * b).norm_sqr()).sum();
        Ok(r.sqrt() / norm)
    }

    /// The sequence `self^(2^0), self^(2^1), ..., self^(2^(count-1))` by repeated squaring.
    pub fn squaring_chain(&self, count: usize) -> Result<Vec<Self>> {
        if !self.is_square() {
            return invalid("matrix powers need a square matrix");
        }
        let mut chain = Vec::with_capacity(count);
        if count == 0 {
            return Ok(chain);
        }
        chain.push(self.clone());
        for _ in 1..count {
            let last = chain.last().expect("chain is non-empty");
            let next = last.mat_mul(last)?;
            chain.push(next);
        }
        Ok(chain)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]])
    }

    #[test]
    fn identity_and_involution_products() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.mat_mul(&i2).unwrap(), i2);
        assert_eq!(pauli_x().mat_mul(&pauli_x()).unwrap(), i2);
    }

    #[test]
    fn rotations_compose() {
        let r = ComplexMatrix::rotation(PI / 3.0).mat_mul(&ComplexMatrix::rotation(PI / 6.0)).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::rotation(PI / 2.0)) < 1e-12);
    }

    #[test]
    fn mat_mul_rejects_mismatched_shapes() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(a.mat_mul(&a), Err(crate::Error::InvalidArgument(_))));
    }

    #[test]
    fn mat_vec_cases() {
        let v = ComplexVector::from_vec(vec![C64::new(0.3, -1.0), C64::new(2.0, 0.5)]).unwrap();
        assert_eq!(ComplexMatrix::identity(2).mat_vec(&v).unwrap(), v);
        assert_eq!(ComplexMatrix::zeros(2, 2).mat_vec(&v).unwrap(), ComplexVector::zeros(2));
        let turned = ComplexMatrix::rotation(PI / 2.0).mat_vec(&ComplexVector::basis(2, 0)).unwrap();
        assert!(turned.max_abs_diff(&ComplexVector::basis(2, 1)) < 1e-15);
        assert!(ComplexMatrix::zeros(3, 3).mat_vec(&v).is_err());
    }

    #[test]
    fn dagger_cases() {
        assert_eq!(ComplexMatrix::identity(3).dagger(), ComplexMatrix::identity(3));
        let r = ComplexMatrix::rotation(0.7);
        assert!(r.dagger().max_abs_diff(&ComplexMatrix::rotation(-0.7)) < 1e-15);
    }

    #[test]
    fn unitarity_defect_cases() {
        assert_eq!(ComplexMatrix::identity(4).unitarity_defect().unwrap(), 0.0);
        let d = ComplexMatrix::diagonal(&[ONE, C64::new(2.0, 0.0)]);
        assert_eq!(d.unitarity_defect().unwrap(), 3.0);
        assert!(ComplexMatrix::zeros(2, 3).unitarity_defect().is_err());
    }

    #[test]
    fn eigen_residual_cases() {
        let v = ComplexVector::from_real(&[0.6, 0.8]);
        assert_eq!(ComplexMatrix::identity(2).eigen_residual(ONE, &v).unwrap(), 0.0);
        let plus = ComplexVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert!(pauli_x().eigen_residual(ONE, &plus).unwrap() < 1e-15);
        assert!(pauli_x().eigen_residual(ONE, &ComplexVector::zeros(2)).is_err());
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        assert!(ComplexMatrix::from_vec(1, 1, vec![C64::new(f64::NAN, 0.0)]).is_err());
        assert!(ComplexVector::from_vec(vec![C64::new(0.0, f64::INFINITY)]).is_err());
        assert!(ComplexMatrix::from_vec(2, 2, vec![ONE; 3]).is_err());
    }

    #[test]
    fn squaring_chain_matches_repeated_products() {
        let r = ComplexMatrix::rotation(0.1);
        let chain = r.squaring_chain(4).unwrap();
        for (b, m) in chain.iter().enumerate() {
            let expect = ComplexMatrix::rotation(0.1 * (1u32 << b) as f64);
            assert!(m.max_abs_diff(&expect) < 1e-14);
        }
    }

    fn small_matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            let data = v.into_iter().map(|(re, im)| C64::new(re, im) / 2f64.sqrt()).collect();
            ComplexMatrix::from_vec(n, n, data).unwrap()
        })
    }

    proptest! {
        #[test]
        fn mat_mul_is_associative(a in small_matrix(4), b in small_matrix(4), c in small_matrix(4)) {
            let left = a.mat_mul(&b).unwrap().mat_mul(&c).unwrap();
            let right = a.mat_mul(&b.mat_mul(&c).unwrap()).unwrap();
            prop_assert!(left.max_abs_diff(&right) < 1e-12);
        }

        #[test]
        fn dagger_reverses_products(a in small_matrix(3), b in small_matrix(3)) {
            let lhs = a.mat_mul(&b).unwrap().dagger();
            let rhs = b.dagger().mat_mul(&a.dagger()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            prop_assert_eq!(a.dagger().dagger(), a);
        }
    }
}
