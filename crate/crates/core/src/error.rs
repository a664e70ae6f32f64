use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    /// A bisection could not meet its residual target within its step budget.
    #[error("precision exhausted: {detail} (hint: {hint})")]
    Precision { detail: String, hint: String },

    /// Tables or inputs that must describe the same object disagree.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// A solver invariant was breached; indicates a bug or a numerically hostile input.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// The requested arithmetic mode is not available for this input.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
