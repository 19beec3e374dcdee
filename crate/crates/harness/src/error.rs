//! Harness-level error type: IO and format failures wrapping core errors.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] pwrc_core::Error),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        HarnessError::Parse { path: path.into(), line, msg: msg.into() }
    }

    pub fn format(msg: impl Into<String>) -> Self {
        HarnessError::Format(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
