use thiserror::Error;

use crate::simplex::ValidationReport;

pub type Result<T> = std::result::Result<T, QspError>;

#[derive(Debug, Error)]
pub enum QspError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("interval ({m}, {n}) is not available for horizon {horizon}")]
    IntervalOutOfRange { m: usize, n: usize, horizon: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a probability vector: {0}")]
    NotOnSimplex(String),

    /// A one-step kernel (1-based time step) failed `validate_kernel`.
    #[error("one-step kernel at step {step} failed validation: {report}")]
    InvalidKernel { step: usize, report: ValidationReport },

    /// A computed object violated an invariant that holds analytically.
    #[error("invariant violated in {context}: {report}")]
    PostCondition { context: &'static str, report: ValidationReport },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
