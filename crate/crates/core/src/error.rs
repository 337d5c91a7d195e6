use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("index {index} out of range for field of {len} dipoles")]
    Index { index: usize, len: usize },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("instance has {size} dipoles, above the exhaustive-search cap of {cap}; use the greedy solver")]
    Size { size: usize, cap: usize },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("sweep failed (partial results kept at {}): {source}", partial.display())]
    Sweep {
        partial: PathBuf,
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
