//! Perturbation expansions for the spectral decomposition of Hermitian
//! matrices.
//!
//! Given `A = U Λ U*` and a small Hermitian `E`, the crate predicts the
//! eigenvalues and eigenvectors of `A + E`:
//!
//! * first order: `ξ_j ≈ α_j + Ê(j,j)` and `U_ap = U(I − M∘Ê)` ([`first_order`]),
//! * third-order accurate eigenvalues from per-block Schur complements
//!   ([`schur`]),
//! * second-order eigenvalue and first-order eigenvector expansions along a
//!   line `A + tF`, including degenerate eigenvalues ([`rayleigh`]).
//!
//! Every predictor is checked against an independent complex Jacobi
//! eigensolver ([`jacobi`]); [`harness`] measures the observed orders of
//! convergence.

pub mod alignment;
pub mod error;
pub mod first_order;
pub mod harness;
pub mod jacobi;
pub mod matrix;
pub mod rayleigh;
pub mod schur;
pub mod text;

pub use alignment::{
    align, blockwise_diagonalize, conjugate_to_eigenbasis, group_eigenvalues, m_matrix, vc_membership,
    AlignedPerturbation, AlignmentMode, BlockStructure, MMatrix,
};
pub use error::{PerturbError, Result};
pub use jacobi::{eigh, eigh_default, residual, SpectralDecomposition};
pub use matrix::{operator_norm, DenseMatrix, HermitianMatrix};
pub use num_complex::Complex64;
