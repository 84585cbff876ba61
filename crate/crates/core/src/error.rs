use thiserror::Error;

/// Errors raised across the uplink chain.
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {key}: {reason}")]
    Config { key: String, reason: String },

    #[error("unsupported numerology: {0}")]
    Numerology(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("unsupported code block size K={0}")]
    UnsupportedBlockSize(usize),

    #[error("degenerate estimator input: {0}")]
    Degenerate(&'static str),

    #[error("insufficient trials: need at least {needed}, got {got}")]
    InsufficientTrials { needed: usize, got: usize },

    #[error("missing calibration for {0}")]
    MissingCalibration(String),

    #[error("invalid gap plan: {0}")]
    GapPlan(String),

    #[error("data file {path}: {reason}")]
    DataFile { path: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
