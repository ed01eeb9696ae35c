//! Dense complex matrices and vectors.
//!
//! Storage is row-major everywhere in the crate: entry `(i, j)` lives at
//! `data[i * cols + j]`. Nothing converts to or from column-major.

use std::ops::{Index, IndexMut};

use num_complex::Complex64 as C64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "CMatrix: empty shape {rows}x{cols}");
        Self { rows, cols, data: vec![ZERO; rows * cols] }
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

    /// Builds a matrix from row-major entries.
    ///
    /// *Panics* if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert!(rows > 0 && cols > 0, "CMatrix: empty shape {rows}x{cols}");
        assert_eq!(data.len(), rows * cols, "CMatrix: entry count does not match shape");
        Self { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "CMatrix: ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: C64, other: &CMatrix) {
        assert_eq!(self.shape(), other.shape(), "add_scaled: shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn add(&self, other: &CMatrix) -> Self {
        let mut out = self.clone();
        out.add_scaled(ONE, other);
        out
    }

    pub fn sub(&self, other: &CMatrix) -> Self {
        let mut out = self.clone();
        out.add_scaled(-ONE, other);
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "matmul: inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Integer matrix power, `self^0 = I`.
    pub fn pow(&self, n: u32) -> Self {
        assert!(self.is_square(), "pow: matrix not square");
        let mut out = Self::identity(self.rows);
        for _ in 0..n {
            out = out.matmul(self);
        }
        out
    }

    pub fn matvec(&self, v: &CVector) -> CVector {
        assert_eq!(self.cols, v.dim(), "matvec: dimension mismatch");
        CVector::from_vec(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(v.as_slice()).map(|(&a, &x)| a * x).sum())
                .collect(),
        )
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace: matrix not square");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows).map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Largest entrywise deviation `|M_ij - conj(M_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square(), "hermiticity_defect: matrix not square");
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CVector {
    data: Vec<C64>,
}

impl CVector {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "CVector: empty");
        Self { data: vec![ZERO; dim] }
    }

    pub fn from_vec(data: Vec<C64>) -> Self {
        assert!(!data.is_empty(), "CVector: empty");
        Self { data }
    }

    pub fn from_real(data: &[f64]) -> Self {
        Self::from_vec(data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn unit(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[k] = ONE;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Unconjugated dot product `w^T v`.
    pub fn dot(&self, other: &CVector) -> C64 {
        assert_eq!(self.dim(), other.dim(), "dot: dimension mismatch");
        self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn sub(&self, other: &CVector) -> Self {
        assert_eq!(self.dim(), other.dim(), "sub: dimension mismatch");
        Self { data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect() }
    }

    pub fn add(&self, other: &CVector) -> Self {
        assert_eq!(self.dim(), other.dim(), "add: dimension mismatch");
        Self { data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect() }
    }
}

impl Index<usize> for CVector {
    type Output = C64;

    #[inline]
    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for CVector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.data[i]
    }
}

/// Kronecker product `a ⊗ b`.
///
/// Entry `(i*rows_b + k, j*cols_b + l)` of the result is `a[i,j] * b[k,l]`.
pub fn kronecker(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let cols = ca * cb;
    let mut out = CMatrix::zeros(ra * rb, cols);
    for i in 0..ra {
        for j in 0..ca {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..rb {
                let dst = &mut out.data[(i * rb + k) * cols + j * cb..(i * rb + k) * cols + (j + 1) * cb];
                for (d, &x) in dst.iter_mut().zip(b.row(k)) {
                    *d = s * x;
                }
            }
        }
    }
    out
}
