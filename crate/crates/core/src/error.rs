use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The metric has no value on this instance (e.g. AUC on a one-class list).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Exhaustive enumeration was requested beyond its supported size.
    #[error("capacity exceeded: {what} supports n <= {limit}, got n = {n}")]
    Capacity {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    /// Some conditional expectation sits exactly on the 0.5 boundary.
    #[error("margin violation: eta[{index}] = 0.5 leaves no classification margin")]
    MarginViolation { index: usize },

    #[error("parse error in {source_name} line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
