//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! This is the ground-truth oracle every predictor is checked against. It
//! shares no code with the perturbation formulas: only the dense matrix type.

use num_complex::Complex64;

use crate::error::{PerturbError, Result};
use crate::matrix::{operator_norm, DenseMatrix, HermitianMatrix};

pub const DEFAULT_MAX_SWEEPS: usize = 64;

/// Default convergence tolerance for an `n x n` problem.
pub fn default_tol(n: usize) -> f64 {
    1e-13 * n.max(1) as f64
}

/// `h = u diag(lambda) u*` with `lambda` non-increasing.
///
/// Each column of `u` has its largest-modulus entry (first one on ties)
/// real and nonnegative, which makes the output deterministic for simple
/// eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub u: DenseMatrix,
    pub lambda: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// `u diag(lambda) u*`.
    pub fn reconstruct(&self) -> HermitianMatrix {
        let n = self.n();
        let scaled = DenseMatrix::from_fn(n, n, |i, j| self.u[(i, j)] * self.lambda[j]);
        HermitianMatrix::symmetrized(&scaled * &self.u.adjoint())
    }

    /// `‖u* u − I‖` in the operator norm.
    pub fn unitarity_defect(&self) -> f64 {
        let g = &(&self.u.adjoint() * &self.u) - &DenseMatrix::identity(self.n());
        operator_norm(&g)
    }
}

pub fn eigh_default(h: &HermitianMatrix) -> Result<SpectralDecomposition> {
    eigh(h, default_tol(h.n()))
}

pub fn eigh(h: &HermitianMatrix, tol: f64) -> Result<SpectralDecomposition> {
    eigh_with_sweeps(h, tol, DEFAULT_MAX_SWEEPS)
}

pub fn eigh_with_sweeps(
    h: &HermitianMatrix,
    tol: f64,
    max_sweeps: usize,
) -> Result<SpectralDecomposition> {
    let tol = tol.max(1e-15);
    let n = h.n();
    let mut a = h.as_dense().clone();
    let mut v = DenseMatrix::identity(n);

    // ‖h‖_F / sqrt(n) never exceeds the spectral norm, so stopping on it is
    // at least as strict as stopping on the spectral norm itself.
    let scale = h.as_dense().frobenius_norm() / (n.max(1) as f64).sqrt();
    let threshold = tol * scale;

    let mut off = off_diagonal_mass(&a);
    let mut sweeps = 0;
    while off > threshold {
        if sweeps == max_sweeps {
            return Err(PerturbError::NoConvergence {
                sweeps,
                off_diagonal: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_mass(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    // Stable, so equal eigenvalues keep their Jacobi order.
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let lambda = order.iter().map(|&k| diag[k]).collect();
    let mut u = DenseMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    normalize_phases(&mut u);
    Ok(SpectralDecomposition { u, lambda })
}

/// `‖u diag(lambda) u* − h‖` in the operator norm.
pub fn residual(h: &HermitianMatrix, d: &SpectralDecomposition) -> Result<f64> {
    if h.n() != d.n() || d.u.rows() != h.n() || d.u.cols() != h.n() {
        return Err(PerturbError::dims(
            format!("{}x{} decomposition", h.n(), h.n()),
            format!("{}x{} with {} eigenvalues", d.u.rows(), d.u.cols(), d.n()),
        ));
    }
    let diff = d.reconstruct().sub(h);
    Ok(diff.operator_norm())
}

/// Rotates each column so that its first largest-modulus entry is real and
/// nonnegative.
pub(crate) fn normalize_phases(u: &mut DenseMatrix) {
    for j in 0..u.cols() {
        let phase = column_phase(u, j);
        if let Some((k, ph)) = phase {
            for i in 0..u.rows() {
                u[(i, j)] *= ph;
            }
            u[(k, j)] = Complex64::new(u[(k, j)].norm(), 0.0);
        }
    }
}

/// Index of the pivot entry of column `j` and the unimodular factor that
/// makes it real nonnegative.
pub(crate) fn column_phase(u: &DenseMatrix, j: usize) -> Option<(usize, Complex64)> {
    let mut best = 0;
    let mut best_abs = -1.0;
    for i in 0..u.rows() {
        let m = u[(i, j)].norm();
        if m > best_abs {
            best = i;
            best_abs = m;
        }
    }
    if best_abs <= 0.0 {
        return None;
    }
    Some((best, u[(best, j)].conj() / best_abs))
}

fn off_diagonal_mass(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilates `a[p][q]` with a complex Givens rotation `G` applied as
/// `a <- G* a G`, accumulating `v <- v G`.
fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let abs_pq = apq.norm();
    if abs_pq == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip entries that are already negligible against both diagonals.
    if abs_pq < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    // e^{-i phi} with apq = |apq| e^{i phi}
    let phase = apq.conj() / abs_pq;

    let zeta = (aqq - app) / (2.0 * abs_pq);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on (p, q).
    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = -phase * s;
    let g_qq = phase * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(app - t * abs_pq, 0.0);
    a[(q, q)] = Complex64::new(aqq + t * abs_pq, 0.0);
}
