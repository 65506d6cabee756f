use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-integrable weight: exponent {0} must exceed -1")]
    NonIntegrable(f64),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("kernel evaluation failed at ({i}, {j}): {reason}")]
    KernelEval { i: usize, j: usize, reason: String },

    #[error("matrix is not positive definite at any jitter level (min eigenvalue {min_eigen:e})")]
    NotPositiveDefinite { min_eigen: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("regression needs at least 3 points, got {0}")]
    DegenerateFit(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam { field, reason: reason.into() }
}
