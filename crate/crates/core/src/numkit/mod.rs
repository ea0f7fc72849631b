//! Dense numerical kernels: row-major matrices, one-sided Jacobi SVD, and
//! direct linear, least-squares and tridiagonal solvers.

mod matrix;
mod solve;
mod svd;

pub use matrix::DenseMatrix;
pub use solve::{lstsq_svd, solve_linear, solve_tridiagonal};
pub use svd::{svd, SvdResult};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumError {
    #[error("empty matrix")]
    Empty,
    #[error("expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular to working tolerance (elimination step {step})")]
    Singular { step: usize },
    #[error("SVD did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },
}
