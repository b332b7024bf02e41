use thiserror::Error;

/// Crate-wide error type. The CLI maps `Validation` and `Domain` to
/// exit code 2 and `Capacity` to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed validation before any work was done.
    #[error("validation error: {0}")]
    Validation(String),

    /// The requested computation exceeds a memory or time budget.
    /// The message includes an estimate and the override, if any.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// An argument is outside the mathematical domain of the operation
    /// (e.g. a multiplicative character evaluated at zero).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity(_) => 3,
            _ => 2,
        }
    }
}
