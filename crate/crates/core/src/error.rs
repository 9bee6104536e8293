use std::path::PathBuf;

use thiserror::Error;

use crate::cmdp::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("context index {context} out of range (num_contexts = {num_contexts})")]
    InvalidContext { context: usize, num_contexts: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("level {level} out of range (horizon = {horizon})")]
    LevelOutOfRange { level: usize, horizon: usize },

    #[error("{what}: size {size} exceeds cap {cap}")]
    CapExceeded { what: &'static str, size: u128, cap: u128 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty batch")]
    EmptyBatch,

    #[error("empty hypothesis class")]
    EmptyClass,

    #[error("permutation has a fixed point at {0}")]
    NotADerangement(usize),

    #[error("instance failed validation:\n{0}")]
    Validation(ValidationReport),

    #[error("certificate check failed: max deviation {deviation:e} exceeds {tolerance:e}")]
    CertificateFailed { deviation: f64, tolerance: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("incompatible experiment: {0}")]
    Incompatible(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json { path: path.into(), source }
    }
}
