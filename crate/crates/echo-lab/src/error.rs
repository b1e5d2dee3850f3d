//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A unit tag outside the accepted set.
    #[error("unknown unit tag `{0}`")]
    UnknownUnit(String),

    /// A domain type rejected construction (out-of-range field).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation rejected its argument (negative time, nonpositive rate, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A fit problem that cannot be set up (too few points, unknown model, ...).
    #[error("fit setup: {0}")]
    FitSetup(String),

    /// Model and schedule kinds that do not belong together.
    #[error("incompatible model/schedule: {0}")]
    Incompatible(String),

    /// A malformed input file; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A bad key or value in a config file or flag set.
    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid_param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn invalid_arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
