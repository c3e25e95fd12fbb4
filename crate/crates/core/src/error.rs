use std::io;

use thiserror::Error;

use crate::algos::RunMetrics;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid index file: {0}")]
    IndexFormat(String),

    /// A traversal or memo exceeded its configured budget. The partial
    /// metrics of the aborted run are attached when there is a run.
    #[error("resource limit exceeded: {message}")]
    ResourceCap {
        message: String,
        metrics: Option<Box<RunMetrics>>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
