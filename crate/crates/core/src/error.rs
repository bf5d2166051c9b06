use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The request would exceed a configured resource budget.
    #[error("resource limit exceeded: {what} (budget {budget})")]
    ResourceLimit { what: String, budget: String },

    /// An internal cross-check disagreed. Never expected; indicates a bug.
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A serialized sieve table could not be decoded.
    #[error("malformed table file {path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
