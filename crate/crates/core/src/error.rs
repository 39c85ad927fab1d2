use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An adaptive integration ran out of subdivisions before reaching its
    /// tolerance. The best estimate is still reported.
    #[error("numeric failure: no convergence (estimate {estimate:e}, error bound {error_bound:e})")]
    NumericFailure { estimate: f64, error_bound: f64 },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("format error in field `{field}`: {reason}")]
    Format { field: String, reason: String },

    #[error("corrupted input: {0}")]
    CorruptedInput(String),

    #[error("degenerate path: {0}")]
    DegeneratePath(String),

    #[error("singular matrix: zero diagonal entry at row {0}")]
    SingularMatrix(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn format_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Format {
        field: field.to_string(),
        reason: reason.into(),
    }
}
