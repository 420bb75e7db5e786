//! Choosing and exploiting the eigenbasis of the unperturbed matrix.
//!
//! Eigenvalues are grouped into blocks of (numerically) equal values, the
//! perturbation is expressed in the eigenbasis, and inside each block the
//! basis can be rotated so that the perturbation becomes block-wise
//! diagonal with non-increasing diagonal entries.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{PerturbError, Result};
use crate::jacobi::{self, SpectralDecomposition};
use crate::matrix::{DenseMatrix, HermitianMatrix};
use crate::schur;

/// Default relative tolerance for treating two eigenvalues as equal.
pub const DEFAULT_GROUP_TOL: f64 = 1e-8;
/// Relative tolerance (against `‖E‖`) below which two in-block diagonal
/// entries of the aligned perturbation count as tied.
pub const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockStructure {
    pub groups: Vec<Range<usize>>,
    pub rep_values: Vec<f64>,
}

impl BlockStructure {
    pub fn n(&self) -> usize {
        self.groups.last().map_or(0, |g| g.end)
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Block id of every index.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for (b, g) in self.groups.iter().enumerate() {
            for i in g.clone() {
                out[i] = b;
            }
        }
        out
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.groups
            .iter()
            .position(|g| g.contains(&i))
            .expect("index outside block structure")
    }

    pub fn has_degenerate_block(&self) -> bool {
        self.groups.iter().any(|g| g.len() > 1)
    }

    /// Smallest distance between representative values of distinct blocks.
    pub fn min_gap(&self) -> f64 {
        self.rep_values
            .windows(2)
            .map(|w| (w[0] - w[1]).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Groups a non-increasing eigenvalue vector into blocks.
///
/// Consecutive values closer than `rel_gap_tol * max(1, max|λ|)` share a
/// block (a gap exactly at the tolerance joins the earlier block), so
/// adjacent blocks are always separated by more than the tolerance.
pub fn group_eigenvalues(lambda: &[f64], rel_gap_tol: f64) -> BlockStructure {
    let scale = lambda.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = rel_gap_tol * scale;
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=lambda.len() {
        if k == lambda.len() || lambda[k - 1] - lambda[k] > tol {
            if k > start {
                groups.push(start..k);
            }
            start = k;
        }
    }
    let rep_values = groups
        .iter()
        .map(|g: &Range<usize>| lambda[g.clone()].iter().sum::<f64>() / g.len() as f64)
        .collect();
    BlockStructure { groups, rep_values }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentMode {
    Raw,
    BlockwiseDiagonal,
}

/// A perturbation `E` expressed in an eigenbasis `U_A` of `A`: `Ê = U_A* E U_A`.
#[derive(Debug, Clone)]
pub struct AlignedPerturbation {
    pub base: SpectralDecomposition,
    pub blocks: BlockStructure,
    pub e_hat: HermitianMatrix,
    pub e_hat_diag: Vec<f64>,
    pub e_hat_off: HermitianMatrix,
    pub mode: AlignmentMode,
    /// Operator norm of the perturbation.
    pub e_norm: f64,
    /// Set when two in-block diagonal entries coincide up to `TIE_TOL * ‖E‖`.
    pub tied_diagonals: bool,
}

impl AlignedPerturbation {
    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.base.lambda
    }

    /// `max(1, ‖A‖)`.
    pub fn a_scale(&self) -> f64 {
        self.base.lambda.iter().fold(1.0f64, |m, x| m.max(x.abs()))
    }

    /// `Λ_α + Ê`, i.e. `A + E` in the aligned basis.
    pub fn shifted_matrix(&self) -> HermitianMatrix {
        HermitianMatrix::from_real_diag(&self.base.lambda).add(&self.e_hat)
    }

    /// `A + E` in the original coordinates.
    pub fn perturbed_matrix(&self) -> HermitianMatrix {
        let u = &self.base.u;
        HermitianMatrix::symmetrized(&(u * self.shifted_matrix().as_dense()) * &u.adjoint())
    }

    pub fn require_mode(&self, expected: AlignmentMode) -> Result<()> {
        if self.mode != expected {
            return Err(PerturbError::Mode {
                expected,
                found: self.mode,
            });
        }
        Ok(())
    }

    fn from_parts(
        base: SpectralDecomposition,
        blocks: BlockStructure,
        e_hat: HermitianMatrix,
        mode: AlignmentMode,
        e_norm: f64,
    ) -> Self {
        let e_hat_diag = e_hat.diagonal_real();
        let mut off = e_hat.as_dense().clone();
        for i in 0..off.rows() {
            off[(i, i)] = Complex64::new(0.0, 0.0);
        }
        let tied_diagonals = blocks.groups.iter().any(|g| {
            g.clone()
                .zip(g.clone().skip(1))
                .any(|(i, j)| (e_hat_diag[i] - e_hat_diag[j]).abs() <= TIE_TOL * e_norm)
        });
        AlignedPerturbation {
            base,
            blocks,
            e_hat_off: HermitianMatrix::symmetrized(off),
            e_hat,
            e_hat_diag,
            mode,
            e_norm,
            tied_diagonals,
        }
    }
}

/// Expresses `e` in the eigenbasis `base` with blocks from the default
/// grouping tolerance.
pub fn conjugate_to_eigenbasis(
    base: &SpectralDecomposition,
    e: &HermitianMatrix,
) -> Result<AlignedPerturbation> {
    let blocks = group_eigenvalues(&base.lambda, DEFAULT_GROUP_TOL);
    conjugate_with_blocks(base, blocks, e)
}

pub fn conjugate_with_blocks(
    base: &SpectralDecomposition,
    blocks: BlockStructure,
    e: &HermitianMatrix,
) -> Result<AlignedPerturbation> {
    if e.n() != base.n() || blocks.n() != base.n() {
        return Err(PerturbError::dims(
            format!("{}x{} perturbation", base.n(), base.n()),
            format!("{}x{} (blocks cover {})", e.n(), e.n(), blocks.n()),
        ));
    }
    let e_hat = e.congruence(&base.u)?;
    let e_norm = e.operator_norm();
    Ok(AlignedPerturbation::from_parts(
        base.clone(),
        blocks,
        e_hat,
        AlignmentMode::Raw,
        e_norm,
    ))
}

/// Convenience: decompose `a` with the oracle and align `e` to it.
pub fn align(a: &HermitianMatrix, e: &HermitianMatrix) -> Result<AlignedPerturbation> {
    let base = jacobi::eigh_default(a)?;
    conjugate_to_eigenbasis(&base, e)
}

/// Rotates the eigenbasis inside each block by the eigenvectors of the
/// corresponding diagonal block of `Ê`, ordered non-increasingly, so that
/// `Ê` becomes block-wise diagonal. Accepts input in either mode.
pub fn blockwise_diagonalize(ap: &AlignedPerturbation) -> Result<AlignedPerturbation> {
    let n = ap.n();
    let mut rotation = DenseMatrix::identity(n);
    for g in &ap.blocks.groups {
        if g.len() < 2 {
            continue;
        }
        let idx: Vec<usize> = g.clone().collect();
        let sub = ap.e_hat.principal_submatrix(&idx);
        let w = jacobi::eigh_default(&sub)?.u;
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                rotation[(i, j)] = w[(a, b)];
            }
        }
    }
    let mut u = &ap.base.u * &rotation;
    // Restore the phase convention of the decomposition and carry the same
    // diagonal phases into the rotation.
    for j in 0..n {
        if let Some((k, ph)) = jacobi::column_phase(&u, j) {
            for i in 0..n {
                u[(i, j)] *= ph;
                rotation[(i, j)] *= ph;
            }
            u[(k, j)] = Complex64::new(u[(k, j)].norm(), 0.0);
        }
    }
    let e_hat = ap.e_hat.congruence(&rotation)?;
    let base = SpectralDecomposition {
        u,
        lambda: ap.base.lambda.clone(),
    };
    Ok(AlignedPerturbation::from_parts(
        base,
        ap.blocks.clone(),
        e_hat,
        AlignmentMode::BlockwiseDiagonal,
        ap.e_norm,
    ))
}

/// Reciprocal eigenvalue-gap matrix, zero wherever both indices share a block.
#[derive(Debug, Clone, PartialEq)]
pub struct MMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl MMatrix {
    /// Builds `M` from eigenvalues and a block label per index. The labels
    /// need not be contiguous, so any eigenvalue ordering is accepted.
    pub fn from_labels(alpha: &[f64], labels: &[usize]) -> Self {
        assert_eq!(alpha.len(), labels.len());
        let n = alpha.len();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                if labels[i] != labels[j] {
                    let v = 1.0 / (alpha[i] - alpha[j]);
                    entries[i * n + j] = v;
                    entries[j * n + i] = -v;
                }
            }
        }
        MMatrix { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    /// `M ∘ X`.
    pub fn hadamard(&self, x: &DenseMatrix) -> DenseMatrix {
        x.hadamard_real(&self.entries)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| Complex64::new(self.get(i, j), 0.0))
    }
}

pub fn m_matrix(base: &SpectralDecomposition, blocks: &BlockStructure) -> MMatrix {
    MMatrix::from_labels(&base.lambda, &blocks.labels())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VcBlockReport {
    pub block: usize,
    /// Largest off-diagonal modulus of the block's Schur complement.
    pub worst_off_diagonal: f64,
    /// `min_{i≠j} |β_i − β_j| / ‖E‖` (infinite for singleton blocks).
    pub worst_gap_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VcReport {
    pub member: bool,
    /// `E = 0` with a multi-element block: the gap condition cannot hold.
    pub degenerate_zero: bool,
    pub blocks: Vec<VcBlockReport>,
}

/// Tests whether the aligned perturbation lies in the set where every Schur
/// complement is diagonal (up to `diag_tol * ‖E‖`) with eigenvalue gaps of
/// at least `c * ‖E‖` inside each block.
pub fn vc_membership(ap: &AlignedPerturbation, c: f64, diag_tol: f64) -> Result<VcReport> {
    let gap = ap.blocks.min_gap();
    if ap.blocks.len() > 1 && ap.e_norm >= 0.5 * gap {
        let block = ap
            .blocks
            .rep_values
            .windows(2)
            .position(|w| (w[0] - w[1]).abs() == gap)
            .unwrap_or(0);
        return Err(PerturbError::GapTooSmall {
            block,
            gap,
            required: 2.0 * ap.e_norm,
        });
    }
    let mut member = true;
    let mut blocks = Vec::with_capacity(ap.blocks.len());
    for (b, g) in ap.blocks.groups.iter().enumerate() {
        let sd = schur::schur_data(ap, b)?;
        let l = g.len();
        let mut worst_off = 0.0f64;
        for i in 0..l {
            for j in 0..l {
                if i != j {
                    worst_off = worst_off.max(sd.b[(i, j)].norm());
                }
            }
        }
        let mut min_sep = f64::INFINITY;
        for i in 0..l {
            for j in (i + 1)..l {
                min_sep = min_sep.min((sd.beta[i] - sd.beta[j]).abs());
            }
        }
        let worst_gap_ratio = if l < 2 {
            f64::INFINITY
        } else if ap.e_norm == 0.0 {
            0.0
        } else {
            min_sep / ap.e_norm
        };
        if l > 1 && (worst_off > diag_tol * ap.e_norm || min_sep < c * ap.e_norm || ap.e_norm == 0.0) {
            member = false;
        }
        blocks.push(VcBlockReport {
            block: b,
            worst_off_diagonal: worst_off,
            worst_gap_ratio,
        });
    }
    let degenerate_zero = ap.e_norm == 0.0 && ap.blocks.has_degenerate_block();
    Ok(VcReport {
        member,
        degenerate_zero,
        blocks,
    })
}
