//! Expansions along a line `A + tF`.
//!
//! With `F̂ = U* F U` block-wise diagonal, the eigenvalues follow
//! `ξ_j(t) = α_j + t F̂(j,j) − t² (F̂* (Λ_α − α_j)^† F̂)(j,j) + O(t³)` and, when
//! the in-block diagonal of `F̂` is strictly decreasing, the eigenvectors
//! follow `U(t) = U + t U (N − M∘F̂) + O(t²)`.

use num_complex::Complex64;

use crate::alignment::{AlignedPerturbation, AlignmentMode, MMatrix};
use crate::error::{PerturbError, Result};
use crate::jacobi::SpectralDecomposition;
use crate::matrix::{DenseMatrix, HermitianMatrix};
use crate::schur::{pinv_diag, PINV_TOL};

/// In-block diagonal entries of `F̂` closer than
/// `STRICTNESS_TOL * max(1, ‖F‖)` are treated as tied.
pub const STRICTNESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RsCoefficients {
    pub a0: Vec<f64>,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
}

impl RsCoefficients {
    pub fn evaluate(&self, t: f64) -> Vec<f64> {
        (0..self.a0.len())
            .map(|j| self.a0[j] + t * self.a1[j] + t * t * self.a2[j])
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct LineExpansion {
    pub base: SpectralDecomposition,
    pub f_hat: HermitianMatrix,
    pub coefficients: RsCoefficients,
    pub n_mat: DenseMatrix,
    pub u_prime: DenseMatrix,
}

impl LineExpansion {
    pub fn new(ap: &AlignedPerturbation, m: &MMatrix) -> Result<Self> {
        let n_mat = n_matrix(ap)?;
        Ok(LineExpansion {
            base: ap.base.clone(),
            f_hat: ap.e_hat.clone(),
            coefficients: rs_coefficients(ap)?,
            u_prime: derivative_from_n(ap, m, &n_mat)?,
            n_mat,
        })
    }
}

/// Pseudoinverse weights `(α_k − α_j)^†`, with every index in `j`'s block
/// mapped to zero.
fn gap_weights(ap: &AlignedPerturbation, j: usize) -> Vec<f64> {
    let labels = ap.blocks.labels();
    let alpha = ap.alpha();
    let shifted: Vec<f64> = (0..ap.n())
        .map(|k| {
            if labels[k] == labels[j] {
                0.0
            } else {
                alpha[k] - alpha[j]
            }
        })
        .collect();
    pinv_diag(&shifted, PINV_TOL * ap.a_scale())
}

/// Column `j` of `F̂* (Λ_α − α_j)^† F̂`.
fn weighted_gram_column(ap: &AlignedPerturbation, j: usize) -> Vec<Complex64> {
    let w = gap_weights(ap, j);
    let f = &ap.e_hat;
    (0..ap.n())
        .map(|i| {
            (0..ap.n())
                .map(|k| f[(k, i)].conj() * w[k] * f[(k, j)])
                .sum()
        })
        .collect()
}

/// Second-order coefficient by direct summation,
/// `−Σ_{k ∉ block(j)} |F̂(k,j)|² / (α_k − α_j)`.
pub fn second_order_by_sum(ap: &AlignedPerturbation, j: usize) -> f64 {
    let labels = ap.blocks.labels();
    let alpha = ap.alpha();
    -(0..ap.n())
        .filter(|&k| labels[k] != labels[j])
        .map(|k| ap.e_hat[(k, j)].norm_sqr() / (alpha[k] - alpha[j]))
        .sum::<f64>()
}

pub fn rs_coefficients(ap: &AlignedPerturbation) -> Result<RsCoefficients> {
    ap.require_mode(AlignmentMode::BlockwiseDiagonal)?;
    let a2 = (0..ap.n())
        .map(|j| -weighted_gram_column(ap, j)[j].re)
        .collect();
    Ok(RsCoefficients {
        a0: ap.alpha().to_vec(),
        a1: ap.e_hat_diag.clone(),
        a2,
    })
}

fn check_strict(ap: &AlignedPerturbation) -> Result<()> {
    ap.require_mode(AlignmentMode::BlockwiseDiagonal)?;
    let tolerance = STRICTNESS_TOL * ap.e_norm.max(1.0);
    for (b, g) in ap.blocks.groups.iter().enumerate() {
        for i in g.clone() {
            for j in (i + 1)..g.end {
                let separation = ap.e_hat_diag[i] - ap.e_hat_diag[j];
                if separation <= tolerance {
                    return Err(PerturbError::DegenerateDirection {
                        block: b,
                        i,
                        j,
                        separation,
                        tolerance,
                    });
                }
            }
        }
    }
    Ok(())
}

/// In-block rotation generator: for `i ≠ j` in one block,
/// `N(i,j) = (F̂* (Λ_α − α_j)^† F̂)(i,j) / (F̂(i,i) − F̂(j,j))`; zero elsewhere.
pub fn n_matrix(ap: &AlignedPerturbation) -> Result<DenseMatrix> {
    check_strict(ap)?;
    let n = ap.n();
    let mut out = DenseMatrix::zeros(n, n);
    let d = &ap.e_hat_diag;
    for g in &ap.blocks.groups {
        for j in g.clone() {
            let col = weighted_gram_column(ap, j);
            for i in g.start..j {
                let v = col[i] / (d[i] - d[j]);
                out[(i, j)] = v;
                out[(j, i)] = -v.conj();
            }
        }
    }
    Ok(out)
}

fn derivative_from_n(ap: &AlignedPerturbation, m: &MMatrix, n_mat: &DenseMatrix) -> Result<DenseMatrix> {
    if m.n() != ap.n() {
        return Err(PerturbError::dims(format!("{}x{} M matrix", ap.n(), ap.n()), format!("{}", m.n())));
    }
    let gen = n_mat - &m.hadamard(ap.e_hat.as_dense());
    ap.base.u.matmul(&gen)
}

/// `U'(0) = U (N − M∘F̂)`.
pub fn eigenvector_derivative(ap: &AlignedPerturbation, m: &MMatrix) -> Result<DenseMatrix> {
    let n_mat = n_matrix(ap)?;
    derivative_from_n(ap, m, &n_mat)
}

#[derive(Debug, Clone)]
pub struct EigensystemPrediction {
    pub xi_hat: Vec<f64>,
    pub u_hat: DenseMatrix,
}

/// Second-order eigenvalues and first-order eigenvectors of `A + tF`.
pub fn predict_eigensystem(
    ap: &AlignedPerturbation,
    m: &MMatrix,
    t: f64,
) -> Result<EigensystemPrediction> {
    let expansion = LineExpansion::new(ap, m)?;
    expansion.predict(ap, t)
}

impl LineExpansion {
    pub fn predict(&self, ap: &AlignedPerturbation, t: f64) -> Result<EigensystemPrediction> {
        let gap = ap.blocks.min_gap();
        let required = 2.0 * t.abs() * ap.e_norm;
        if ap.blocks.len() > 1 && (gap.is_nan() || gap <= required) {
            return Err(PerturbError::GapTooSmall {
                block: 0,
                gap,
                required,
            });
        }
        Ok(EigensystemPrediction {
            xi_hat: self.coefficients.evaluate(t),
            u_hat: &self.base.u + &self.u_prime.scale(t),
        })
    }
}
