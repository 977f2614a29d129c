use thiserror::Error;

pub type Result<T> = std::result::Result<T, FomError>;

#[derive(Debug, Error)]
pub enum FomError {
    /// An argument is outside the domain the operation accepts.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Problem data (matrices, labels) is empty or malformed.
    #[error("invalid data: {0}")]
    Data(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The oracle reported a value below its declared optimum.
    #[error("oracle inconsistency: f(x0) - f* = {gap:e} is negative beyond tolerance")]
    OracleInconsistency { gap: f64 },

    #[error("non-finite value at iteration {iteration}: {what}")]
    NumericalFailure { iteration: usize, what: String },

    /// A precondition on verified inputs was not met.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Two independent constructions of the same object disagree.
    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
