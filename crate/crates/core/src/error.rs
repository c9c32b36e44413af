use thiserror::Error;

use crate::estimate::FitResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("basis matrices are linearly dependent (Gram eigenvalue ratio {ratio:.3e})")]
    LinearlyDependentBasis { ratio: f64 },

    #[error("G0 is not orthogonal to basis matrix {index}")]
    NonOrthogonalG0 { index: usize },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("sample covariance is singular (rank below p)")]
    SingularSample,

    #[error("Newton-Raphson did not converge within {} iterations", .0.iterations)]
    MaxIterationsExceeded(Box<FitResult>),

    #[error("unsupported model: {0}")]
    UnsupportedModel(&'static str),

    #[error("invalid anchor matrix: {0}")]
    InvalidAnchor(&'static str),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("argument {0} outside the function domain")]
    DomainError(f64),

    #[error("at least {needed} observations required, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid options: {0}")]
    InvalidOptions(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
