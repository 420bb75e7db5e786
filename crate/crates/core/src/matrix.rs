//! Dense complex matrices and the Hermitian wrapper used throughout the crate.
//!
//! Storage is row-major `Complex64`. Every constructor that accepts external
//! data rejects non-finite entries, so all downstream numerics can assume
//! finite input.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{PerturbError, Result};
use crate::jacobi;

/// Default relative asymmetry tolerance accepted by [`HermitianMatrix::new`].
pub const DEFAULT_ASYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(PerturbError::dims(
                format!("{} entries", rows * cols),
                format!("{} entries", data.len()),
            ));
        }
        if let Some(k) = data.iter().position(|z| !z.is_finite()) {
            return Err(PerturbError::NonFinite {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    /// Builds a matrix from real row-major rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
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

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Entrywise product with a real matrix of the same shape (row-major).
    pub fn hadamard_real(&self, weights: &[f64]) -> Self {
        assert_eq!(weights.len(), self.data.len(), "hadamard shape mismatch");
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(weights).map(|(z, w)| z * w).collect(),
        }
    }

    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Self {
        Self::from_fn(row_idx.len(), col_idx.len(), |i, j| self[(row_idx[i], col_idx[j])])
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows {
            return Err(PerturbError::dims(
                format!("{} rows on the right", self.cols),
                format!("{}", rhs.rows),
            ));
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// Solves `self * X = rhs` by LU factorisation with partial pivoting.
    pub fn solve(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.rows;
        if !self.is_square() || rhs.rows != n {
            return Err(PerturbError::dims(
                format!("square system with {} rows", rhs.rows),
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        let mut a = self.clone();
        let mut x = rhs.clone();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= f64::EPSILON * scale {
                return Err(PerturbError::GapTooSmall {
                    block: k,
                    gap: pivot,
                    required: f64::EPSILON * scale,
                });
            }
            if p != k {
                a.swap_rows(p, k);
                x.swap_rows(p, k);
            }
            let d = a[(k, k)];
            for i in (k + 1)..n {
                let f = a[(i, k)] / d;
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k..n {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
                for j in 0..x.cols {
                    let v = x[(k, j)];
                    x[(i, j)] -= f * v;
                }
            }
        }
        for k in (0..n).rev() {
            let d = a[(k, k)];
            for j in 0..x.cols {
                let mut s = x[(k, j)];
                for i in (k + 1)..n {
                    s -= a[(k, i)] * x[(i, j)];
                }
                x[(k, j)] = s / d;
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<DenseMatrix> {
        self.solve(&DenseMatrix::identity(self.rows))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;

    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;

    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;

    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.matmul(rhs).expect("shape mismatch in mul")
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>10.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A dense matrix that equals its conjugate transpose exactly as stored.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: DenseMatrix,
}

impl HermitianMatrix {
    /// Symmetrizes `m` to `(m + m*)/2`, rejecting input whose asymmetry
    /// exceeds `DEFAULT_ASYMMETRY_TOL` relative to its largest entry.
    pub fn new(m: DenseMatrix) -> Result<Self> {
        Self::with_tolerance(m, DEFAULT_ASYMMETRY_TOL)
    }

    pub fn with_tolerance(m: DenseMatrix, rel_tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(PerturbError::dims(
                "square matrix",
                format!("{}x{}", m.rows, m.cols),
            ));
        }
        if !m.is_finite() {
            let k = m.data.iter().position(|z| !z.is_finite()).unwrap_or(0);
            return Err(PerturbError::NonFinite {
                row: k / m.cols.max(1),
                col: k % m.cols.max(1),
            });
        }
        let tolerance = rel_tol * m.max_abs();
        for i in 0..m.rows {
            for j in i..m.cols {
                let deviation = (m[(i, j)] - m[(j, i)].conj()).norm();
                if deviation > tolerance {
                    return Err(PerturbError::NotHermitian {
                        row: i,
                        col: j,
                        deviation,
                        tolerance,
                    });
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without any tolerance check. Intended for matrices that
    /// are Hermitian up to rounding by construction (e.g. `U* H U`).
    pub(crate) fn symmetrized(m: DenseMatrix) -> Self {
        debug_assert!(m.is_square());
        let n = m.rows;
        let mut out = m;
        for i in 0..n {
            let d = out[(i, i)].re;
            out[(i, i)] = Complex64::new(d, 0.0);
            for j in (i + 1)..n {
                let v = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        HermitianMatrix { inner: out }
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            inner: DenseMatrix::zeros(n, n),
        }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        HermitianMatrix {
            inner: DenseMatrix::from_real_diag(diag),
        }
    }

    /// Real symmetric input given by rows. Panics if the rows are not symmetric.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        Self::new(DenseMatrix::from_real_rows(rows)).expect("rows must be symmetric")
    }

    pub fn n(&self) -> usize {
        self.inner.rows
    }

    pub fn as_dense(&self) -> &DenseMatrix {
        &self.inner
    }

    pub fn into_dense(self) -> DenseMatrix {
        self.inner
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.inner[(i, i)].re).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix {
            inner: self.inner.scale(s),
        }
    }

    pub fn add(&self, other: &HermitianMatrix) -> Self {
        HermitianMatrix {
            inner: &self.inner + &other.inner,
        }
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Self {
        HermitianMatrix {
            inner: &self.inner - &other.inner,
        }
    }

    /// `u* H u`, re-symmetrized to remove rounding asymmetry.
    pub fn congruence(&self, u: &DenseMatrix) -> Result<Self> {
        let tmp = self.inner.matmul(u)?;
        Ok(Self::symmetrized(u.adjoint().matmul(&tmp)?))
    }

    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        HermitianMatrix {
            inner: self.inner.submatrix(idx, idx),
        }
    }

    /// Spectral norm, i.e. the largest eigenvalue modulus.
    pub fn operator_norm(&self) -> f64 {
        if self.n() == 0 {
            return 0.0;
        }
        let d = jacobi::eigh_default(self).expect("Jacobi failed on finite Hermitian input");
        d.lambda
            .first()
            .map(|&top| top.abs().max(d.lambda[d.lambda.len() - 1].abs()))
            .unwrap_or(0.0)
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.inner[idx]
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hermitian")?;
        self.inner.fmt(f)
    }
}

/// Spectral 2-norm: the square root of the largest eigenvalue of `m* m`.
pub fn operator_norm(m: &DenseMatrix) -> f64 {
    if m.rows == 0 || m.cols == 0 {
        return 0.0;
    }
    // Work with the smaller Gram matrix.
    let gram = if m.rows < m.cols {
        m.matmul(&m.adjoint())
    } else {
        m.adjoint().matmul(m)
    }
    .expect("gram shapes agree");
    let gram = HermitianMatrix::symmetrized(gram);
    let top = jacobi::eigh_default(&gram)
        .expect("Jacobi failed on finite Gram matrix")
        .lambda[0];
    top.max(0.0).sqrt()
}
