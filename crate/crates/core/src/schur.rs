//! Per-block Schur complements and the refined eigenvalue predictor.
//!
//! For a block with eigenvalue `ρ` (indices `I`, complement `J`), the
//! aligned perturbation splits as `Ê11 = Ê[I,I]`, `C = Ê[I,J]`,
//! `D = Ê[J,J]`, and the Schur complement is
//! `B = Ê11 − C (Λ_τ − ρ + D)^{-1} C*`. The eigenvalues `β` of `B`, added to
//! `ρ`, predict the perturbed eigenvalues of the block with error
//! `O(‖B‖‖C‖²)`.
//!
//! All block quantities are computed in the `ρ`-first ordering `[I, J]` on
//! the shifted matrix `A − ρI + E`; outputs are mapped back to the global
//! non-increasing order.

use num_complex::Complex64;

use crate::alignment::AlignedPerturbation;
use crate::error::{PerturbError, Result};
use crate::jacobi;
use crate::matrix::{operator_norm, DenseMatrix, HermitianMatrix};

/// Required separation `min|τ − ρ| > MARGIN_FACTOR * ‖E‖`.
pub const MARGIN_FACTOR: f64 = 2.0;
/// Relative threshold below which a diagonal entry is treated as zero by
/// the diagonal pseudoinverse.
pub const PINV_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchurVariant {
    /// `B = Ê11 − C (Λ_τ − ρ + D)^{-1} C*`
    Full,
    /// `B̃ = Ê11 − C (Λ_τ − ρ)^† C*`
    Simplified,
}

#[derive(Debug, Clone)]
pub struct SchurData {
    pub block_index: usize,
    pub rho: f64,
    pub l: usize,
    pub m: usize,
    /// Global indices of the block, then of its complement.
    pub block_indices: Vec<usize>,
    pub complement_indices: Vec<usize>,
    pub e11: HermitianMatrix,
    pub b: HermitianMatrix,
    pub c: DenseMatrix,
    pub d: HermitianMatrix,
    pub lambda_tau: Vec<f64>,
    /// Eigenvalues of `b`, non-increasing.
    pub beta: Vec<f64>,
    /// Set when two entries of `beta` are within `1e-12` (pairing with the
    /// oracle eigenvalues by sorted order is then ambiguous).
    pub ambiguous_pairing: bool,
}

impl SchurData {
    /// `‖B‖ ‖C‖²`, the scale of the refined predictor's error.
    pub fn error_scale(&self) -> f64 {
        let c = operator_norm(&self.c);
        self.b.operator_norm() * c * c
    }

    /// `Λ_τ − ρ + D`.
    pub fn shifted_complement(&self) -> DenseMatrix {
        let mut k = self.d.as_dense().clone();
        for (i, tau) in self.lambda_tau.iter().enumerate() {
            k[(i, i)] += Complex64::new(tau - self.rho, 0.0);
        }
        k
    }
}

/// Moore–Penrose inverse of a real diagonal given by its entries.
pub fn pinv_diag(values: &[f64], threshold: f64) -> Vec<f64> {
    values
        .iter()
        .map(|&v| if v.abs() > threshold { 1.0 / v } else { 0.0 })
        .collect()
}

fn check_margin(ap: &AlignedPerturbation, block: usize, rho: f64, tau: &[f64]) -> Result<()> {
    let gap = tau
        .iter()
        .map(|t| (t - rho).abs())
        .fold(f64::INFINITY, f64::min);
    let required = MARGIN_FACTOR * ap.e_norm;
    if gap.is_nan() || gap <= required {
        return Err(PerturbError::GapTooSmall {
            block,
            gap,
            required,
        });
    }
    Ok(())
}

pub fn schur_data(ap: &AlignedPerturbation, block: usize) -> Result<SchurData> {
    schur_data_variant(ap, block, SchurVariant::Full)
}

pub fn schur_data_variant(
    ap: &AlignedPerturbation,
    block: usize,
    variant: SchurVariant,
) -> Result<SchurData> {
    let group = ap
        .blocks
        .groups
        .get(block)
        .ok_or_else(|| PerturbError::dims(format!("block < {}", ap.blocks.len()), block.to_string()))?
        .clone();
    let rho = ap.blocks.rep_values[block];
    let block_indices: Vec<usize> = group.clone().collect();
    let complement_indices: Vec<usize> = (0..ap.n()).filter(|i| !group.contains(i)).collect();
    let lambda_tau: Vec<f64> = complement_indices.iter().map(|&i| ap.alpha()[i]).collect();
    check_margin(ap, block, rho, &lambda_tau)?;

    let e = ap.e_hat.as_dense();
    let e11 = ap.e_hat.principal_submatrix(&block_indices);
    let c = e.submatrix(&block_indices, &complement_indices);
    let d = ap.e_hat.principal_submatrix(&complement_indices);
    let l = block_indices.len();
    let m = complement_indices.len();

    let correction = if m == 0 {
        DenseMatrix::zeros(l, l)
    } else {
        match variant {
            SchurVariant::Full => {
                let mut k = d.as_dense().clone();
                for (i, tau) in lambda_tau.iter().enumerate() {
                    k[(i, i)] += Complex64::new(tau - rho, 0.0);
                }
                let x = k.solve(&c.adjoint())?;
                &c * &x
            }
            SchurVariant::Simplified => {
                let shifted: Vec<f64> = lambda_tau.iter().map(|t| t - rho).collect();
                let w = pinv_diag(&shifted, PINV_TOL * ap.a_scale());
                let cw = DenseMatrix::from_fn(l, m, |i, j| c[(i, j)] * w[j]);
                &cw * &c.adjoint()
            }
        }
    };
    let b = HermitianMatrix::symmetrized(e11.as_dense() - &correction);
    let beta = jacobi::eigh_default(&b)?.lambda;
    let ambiguous_pairing = beta.windows(2).any(|w| (w[0] - w[1]).abs() < 1e-12);
    Ok(SchurData {
        block_index: block,
        rho,
        l,
        m,
        block_indices,
        complement_indices,
        e11,
        b,
        c,
        d,
        lambda_tau,
        beta,
        ambiguous_pairing,
    })
}

/// Predicted eigenvalues of `A + E`: inside each block, `α_j + β_{j−i}`.
pub fn refined_eigenvalues(ap: &AlignedPerturbation, variant: SchurVariant) -> Result<Vec<f64>> {
    let mut out = vec![0.0; ap.n()];
    for (b, g) in ap.blocks.groups.iter().enumerate() {
        let sd = schur_data_variant(ap, b, variant)?;
        for (k, j) in g.clone().enumerate() {
            out[j] = ap.alpha()[j] + sd.beta[k];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SimilarityDiagnostic {
    /// `[[B, C], [G B, Λ_τ − ρ + D + G C]] + ρI` with
    /// `G = (Λ_τ − ρ + D)^{-1} C*`, in the `ρ`-first ordering.
    pub transformed: DenseMatrix,
    /// The non-orthonormal basis `S = [[I, 0], [−G, I]]`.
    pub basis: DenseMatrix,
    pub q2_norm: f64,
    pub q3_norm: f64,
    /// `‖S T S^{-1} − P(Λ_α + Ê)P*‖`, which vanishes when `T` is similar to
    /// `A + E` through `S`.
    pub similarity_residual: f64,
}

pub fn schur_similarity_diagnostic(
    ap: &AlignedPerturbation,
    block: usize,
) -> Result<SimilarityDiagnostic> {
    let sd = schur_data(ap, block)?;
    let (l, m) = (sd.l, sd.m);
    let n = l + m;
    let k = sd.shifted_complement();
    let g = if m == 0 {
        DenseMatrix::zeros(0, l)
    } else {
        k.solve(&sd.c.adjoint())?
    };
    let gb = &g * sd.b.as_dense();
    let gc = &g * &sd.c;
    let rho = Complex64::new(sd.rho, 0.0);
    let transformed = DenseMatrix::from_fn(n, n, |i, j| {
        let v = match (i < l, j < l) {
            (true, true) => sd.b[(i, j)],
            (true, false) => sd.c[(i, j - l)],
            (false, true) => gb[(i - l, j)],
            (false, false) => k[(i - l, j - l)] + gc[(i - l, j - l)],
        };
        if i == j {
            v + rho
        } else {
            v
        }
    });
    let basis = DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else if i >= l && j < l {
            -g[(i - l, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let basis_inv = DenseMatrix::from_fn(n, n, |i, j| {
        if i >= l && j < l {
            -basis[(i, j)]
        } else {
            basis[(i, j)]
        }
    });
    let order: Vec<usize> = sd
        .block_indices
        .iter()
        .chain(&sd.complement_indices)
        .copied()
        .collect();
    let original = ap.shifted_matrix().as_dense().submatrix(&order, &order);
    let back = &(&basis * &transformed) * &basis_inv;
    let similarity_residual = operator_norm(&(&back - &original));
    Ok(SimilarityDiagnostic {
        q2_norm: operator_norm(&sd.c),
        q3_norm: operator_norm(&gb),
        transformed,
        basis,
        similarity_residual,
    })
}
