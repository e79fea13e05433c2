use thiserror::Error;

/// Failure modes shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("admissibility assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("degenerate frequency: {0}")]
    DegenerateFrequency(String),

    #[error("root finding failed: {0}")]
    RootFailure(String),

    #[error("spectrum incomplete: {0}")]
    IncompleteSpectrum(String),

    #[error("contour resolution failed: {0}")]
    ContourResolutionFailure(String),

    #[error("problem size {got} exceeds dense solver limit {limit}")]
    SizeLimit { got: usize, limit: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("value is not an eigenvalue: {0}")]
    NotAnEigenvalue(String),

    #[error("integrator failure: {0}")]
    IntegratorFailure(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
