use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Inputs violate a documented precondition (non-prime degree, element
    /// outside the required subfield, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The requested computation does not fit the configured budget.
    #[error("capacity exceeded: requires {required}, budget is {budget}")]
    Capacity { required: String, budget: String },

    #[error("division by zero")]
    DivisionByZero,

    /// An element lies outside the domain of an action (e.g. not in S).
    #[error("domain error: {0}")]
    Domain(String),

    /// Two computations that must agree did not. Always a bug, never rounded away.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("malformed cache file: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
