use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid exponent {0}: must be a real number >= 1 or inf")]
    InvalidExponent(String),

    #[error("vector contains a non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("empty vector")]
    Empty,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A construction was requested outside the range where its claim holds.
    #[error("hypothesis violated for {tag}: {reason}")]
    Hypothesis { tag: String, reason: String },

    #[error("operator norm is not certified; attainment is only defined relative to a certified norm")]
    Uncertified,

    #[error("invalid tolerance {0}: must lie in (0, 1e-2]")]
    InvalidTolerance(f64),

    #[error("degenerate norm: {0}")]
    DegenerateNorm(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
