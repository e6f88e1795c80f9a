//! Error type shared across the crate.

/// Errors raised by solvers, estimators, and model constructors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration vector had a different length than the model expects.
    #[error("dimension mismatch: expected {expected} spins, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Exact enumeration requested for a system too large to enumerate.
    #[error("cannot enumerate {n} spins exactly (limit is {limit})")]
    TooLargeToEnumerate { n: usize, limit: usize },

    /// An operation was applied to an incompatible energy model, e.g. asking a
    /// continuous potential for a spin energy.
    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    /// A parameter failed validation; the message names the field.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A gradient or weight became NaN/inf, typically a divergent learning rate.
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
