use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A mean, weight or probability outside its admissible set.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent dimensions or malformed input.
    #[error("structural error: {0}")]
    Structural(String),

    /// The instance or state does not meet an operation's precondition
    /// (tied best arms, zero max-min value, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Schedule or instance constraints violated.
    #[error("invalid instance: {0}")]
    Invalid(String),

    /// A numerical routine failed to satisfy its own postcondition.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
