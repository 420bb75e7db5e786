use thiserror::Error;

use crate::alignment::AlignmentMode;

pub type Result<T> = std::result::Result<T, PerturbError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not Hermitian: entry ({row}, {col}) deviates by {deviation:e} (tolerance {tolerance:e})")]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
        tolerance: f64,
    },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal mass {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("expected {expected:?} perturbation, found {found:?}")]
    Mode {
        expected: AlignmentMode,
        found: AlignmentMode,
    },

    #[error("eigenvalue gap too small for block {block}: gap {gap:e} must exceed {required:e}")]
    GapTooSmall {
        block: usize,
        gap: f64,
        required: f64,
    },

    #[error("tied diagonal entries in block {block} at indices {i} and {j} (separation {separation:e}, tolerance {tolerance:e})")]
    DegenerateDirection {
        block: usize,
        i: usize,
        j: usize,
        separation: f64,
        tolerance: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("study failed: {0}")]
    Study(String),
}

impl PerturbError {
    pub(crate) fn dims(expected: impl Into<String>, found: impl Into<String>) -> Self {
        PerturbError::DimensionMismatch {
            expected: expected.into(),
            found: found.into(),
        }
    }

    /// True for failures caused by the numerical preconditions of a
    /// predictor (small gaps, tied directions, solver breakdown) rather
    /// than by malformed input.
    pub fn is_numerical_precondition(&self) -> bool {
        matches!(
            self,
            PerturbError::GapTooSmall { .. }
                | PerturbError::DegenerateDirection { .. }
                | PerturbError::NoConvergence { .. }
                | PerturbError::Mode { .. }
        )
    }
}
