use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("point is not strictly interior: {0}")]
    NotInterior(String),

    #[error("unknown cell id {0}")]
    UnknownCell(u64),

    #[error("division has no cells")]
    EmptyDivision,

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("point already in configuration")]
    DuplicatePoint,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("objective evaluation failed: {0}")]
    Objective(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}
