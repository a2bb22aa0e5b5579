use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by configuration, execution and reporting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("statistical test undefined: {0}")]
    UndefinedTest(String),

    #[error("reporting error: {0}")]
    Report(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed records: {0}")]
    Records(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Schema { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
