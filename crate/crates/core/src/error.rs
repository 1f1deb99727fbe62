//! Crate-wide error type.

use std::fmt;

/// Errors produced by the library.
#[derive(Debug)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    Domain(String),
    /// Input valid in principle but outside the supported range.
    Range(String),
    /// Structurally invalid data (failed invariant, bad configuration).
    Validation(String),
    /// Iterative solver failure.
    Solver(String),
    /// File or stream parse failure.
    Parse(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Range(msg) => write!(f, "range error: {msg}"),
            Error::Validation(msg) => write!(f, "validation error: {msg}"),
            Error::Solver(msg) => write!(f, "solver error: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}
