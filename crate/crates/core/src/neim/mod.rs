//! Greedy neural approximation of an affine decomposition of the reduced
//! nonlinearity, `N̂(ṽ; μ) = Σᵢ θᵢ(μ) M_{μ⁽ⁱ⁾}(ṽ)`.
//!
//! Training works entirely on a precomputed [`TrainingGrid`]; each step picks
//! the training parameter with the largest weighted error, fits a network (or a
//! constant vector in exact mode) to the orthogonalized targets at that
//! parameter, and re-solves the coefficients for every training parameter.

mod diagnostics;
mod grid;
mod interp;
mod model;
mod theta;
mod train;
mod weights;

pub use diagnostics::{error_decomposition_report, ErrorDecomposition};
pub use grid::{build_training_grid, TrainingGrid};
pub use interp::{finalize_theta, Interpolant1D, InterpolationMethod, ThetaInterpolants};
pub use model::{ModeKind, ModelFile, NeimMode, NeimModel, MODEL_FORMAT_VERSION};
pub use theta::{error_quadrature, orthogonalize_targets, select_parameter, solve_theta, ExpansionState};
pub use train::{neim_train, NeimConfig, StepRecord, StoppingCriteria, Termination, Trainer, TrainingLog, TrainingTrace};
pub use weights::{ErrorWeights, TrainingWeights, WeightScheme};

use thiserror::Error;

use crate::mlp::MlpError;
use crate::pod::PodError;

#[derive(Debug, Error)]
pub enum NeimError {
    #[error("non-finite nonlinearity value at snapshot {i}, parameter {j}")]
    NonFinite { i: usize, j: usize },
    #[error("invalid training grid: {0}")]
    InvalidGrid(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("every training parameter has already been selected")]
    ParametersExhausted,
    #[error("orthogonalized target has negligible norm")]
    Degenerate,
    #[error("network training failed at step {step}: {source}")]
    Network { step: usize, source: MlpError },
    #[error("invalid interpolation nodes: {0}")]
    Interpolation(String),
    #[error("model file: {0}")]
    ModelFile(String),
    #[error(transparent)]
    Pod(#[from] PodError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
