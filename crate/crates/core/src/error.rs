use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input at coordinate {index}")]
    NonFiniteInput { index: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not positive definite: {context}")]
    Singular { context: String },

    #[error("AR(1) coefficient phi = {phi} is not stationary (|phi| must be < 1)")]
    NonStationary { phi: f64 },

    #[error("autocorrelation undefined for a zero-variance series")]
    ZeroVariance,

    #[error("data error in {path}: {reason}")]
    Data { path: PathBuf, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("runs are not comparable: {0}")]
    Mismatch(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI, distinct per failure class.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::InvalidParameter { .. } => 2,
            Error::Data { .. } | Error::Singular { .. } | Error::NonStationary { .. } => 3,
            Error::Io { .. } => 4,
            Error::Mismatch(_) => 5,
            _ => 6,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
