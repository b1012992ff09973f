//! Error type shared by all library modules.
//!
//! Variants are grouped by how callers are expected to react: configuration
//! errors are user-fixable, numeric errors indicate a diverged computation,
//! and data/io errors cover everything on the filesystem side. The CLI maps
//! the groups to stable exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or an operation that the given inputs cannot support.
    #[error("config error: {0}")]
    Config(String),

    /// A computation produced non-finite or otherwise unusable values.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed file contents (bad magic, truncated payload, shape mismatch).
    #[error("format error in {path}: {reason}")]
    Format { path: String, reason: String },

    /// Ground-truth poses were required but are not available.
    #[error("poses unavailable: {0}")]
    PosesUnavailable(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn format(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
