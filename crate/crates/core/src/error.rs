use thiserror::Error;

/// Errors produced across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tau calibration did not converge; last bracket [{lo}, {hi}]")]
    CalibrationFailure { lo: f64, hi: f64 },

    #[error("graph is disconnected: vertices {a} and {b} lie in different components")]
    Disconnected { a: usize, b: usize },

    #[error("graph is not 2-edge-connected: {0}")]
    NotTwoEdgeConnected(String),

    #[error("invalid walk: {0}")]
    InvalidWalk(String),

    #[error("enumeration too large ({size} sequences > {limit}); use a Monte Carlo mode instead")]
    SizeGuard { size: u128, limit: u128 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
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

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
