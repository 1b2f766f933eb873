//! Error type shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric parameter violated its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// An index fell outside the domain of a table or model.
    #[error("out of range: {0}")]
    OutOfRange(String),
    /// Structurally invalid input: empty sets, mismatched lengths, bad grids.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Model training failed to produce a usable estimator.
    #[error("estimator failure: {0}")]
    Estimator(String),
    /// Malformed file contents.
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("{other:?}")),
        }
    }
}

impl Error {
    pub(crate) fn invalid_parameter(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn out_of_range(msg: impl Into<String>) -> Self {
        Error::OutOfRange(msg.into())
    }

    pub(crate) fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
