use thiserror::Error;

/// Errors raised by the library. Variants follow the failure classes of the
/// public operations so callers (the CLI in particular) can map them to exit
/// codes and messages without string matching.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error: {0}")]
    Semantic(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("non-finite objective: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! input_err {
    ($($arg:tt)*) => { $crate::error::Error::Input(format!($($arg)*)) };
}
pub(crate) use input_err;
