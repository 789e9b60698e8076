use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("trace mismatch: expected {expected}, got {got}")]
    TraceMismatch { expected: f64, got: f64 },

    #[error("not a projection: {0}")]
    NotProjection(String),

    #[error("effects do not sum to identity (deviation {0:e})")]
    Completeness(f64),

    #[error("reduced state is rank deficient (min eigenvalue {0:e})")]
    RankDeficient(f64),

    #[error("vector is not normalised (norm {0})")]
    NotNormalized(f64),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
