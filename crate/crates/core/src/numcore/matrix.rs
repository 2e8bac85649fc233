use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(Error::BufferLength {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// `|v><w|`
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M - M^dag|` entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_diagonal(&self) -> bool {
        self.data
            .iter()
            .enumerate()
            .all(|(idx, z)| idx / self.cols == idx % self.cols || *z == ZERO)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|z| **z != ZERO).count()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        self.map(|z| z * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.map(|z| z * factor)
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: C64, other: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    /// Matrix product. Zero entries of the left factor are skipped, and a
    /// sparse right factor is walked through its compressed rows, so products
    /// involving permutation-like or pure-state matrices stay cheap.
    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        if rhs.nnz() * 4 < rhs.data.len() {
            return SparseMatrix::from_dense(rhs).left_mul_dense(self);
        }
        let n = rhs.cols;
        let mut out = ComplexMatrix::zeros(self.rows, n);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `[self, rhs] = self rhs - rhs self`
    pub fn commutator(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    pub fn anticommutator(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        &self.matmul(rhs) + &rhs.matmul(self)
    }

    pub fn kron(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let (r, c) = (self.rows * rhs.rows, self.cols * rhs.cols);
        let mut out = ComplexMatrix::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// `Tr(self * rhs)` without forming the product.
    pub fn trace_product(&self, rhs: &ComplexMatrix) -> C64 {
        assert_eq!((self.rows, self.cols), (rhs.cols, rhs.rows));
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a != ZERO {
                    acc += a * rhs.data[k * rhs.cols + i];
                }
            }
        }
        acc
    }

    /// `(M + M^dag) / 2`
    pub fn hermitian_part(&self) -> ComplexMatrix {
        let adj = self.adjoint();
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&adj.data) {
            *a = (*a + b) * 0.5;
        }
        out
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.axpy(ONE, rhs);
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        self.axpy(-ONE, rhs);
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: f64) -> ComplexMatrix {
        self.scale_real(rhs)
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: C64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_bad_buffers() {
        assert_eq!(ComplexMatrix::new(0, 2, vec![]), Err(Error::EmptyMatrix));
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![ZERO; 3]),
            Err(Error::BufferLength { expected: 4, found: 3 })
        ));
        let err = ComplexMatrix::new(1, 2, vec![ZERO, c(f64::NAN, 0.0)]).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 0, col: 1 });
    }

    #[test]
    fn sparse_and_dense_products_agree() {
        let a = ComplexMatrix::from_fn(5, 4, |i, j| c((i * 3 + j) as f64 - 4.0, (i as f64) - (j as f64)));
        let mut b = ComplexMatrix::zeros(4, 3);
        b[(1, 2)] = c(2.0, -1.0);
        b[(3, 0)] = c(0.5, 0.25);
        let dense_b = ComplexMatrix::from_fn(4, 3, |i, j| c((i + j) as f64, 1.0));
        for rhs in [&b, &dense_b] {
            let got = a.matmul(rhs);
            for i in 0..5 {
                for j in 0..3 {
                    let want: C64 = (0..4).map(|k| a[(i, k)] * rhs[(k, j)]).sum();
                    assert!((got[(i, j)] - want).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn kron_and_trace_product() {
        let x = ComplexMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let i2 = ComplexMatrix::identity(2);
        let xi = x.kron(&i2);
        assert_eq!(xi[(0, 2)], ONE);
        assert_eq!(xi[(1, 3)], ONE);
        assert_eq!(xi.nnz(), 4);
        let y = ComplexMatrix::from_fn(4, 4, |i, j| c(i as f64, j as f64));
        assert!((xi.trace_product(&y) - xi.matmul(&y).trace()).norm() < 1e-12);
    }
}
