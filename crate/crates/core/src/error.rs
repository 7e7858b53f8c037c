use std::path::PathBuf;

/// Coarse classification used by callers (the CLI) to map errors to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad arguments or configuration supplied by the caller.
    Argument,
    /// Problems with input data: parse failures, degenerate geometry, bad files.
    Data,
    /// Broken internal invariants; always a bug.
    Internal,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("empty point cloud: {0}")]
    EmptyCloud(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("cannot fit model: {0}")]
    Fit(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("index file version mismatch: found {found:?}")]
    VersionMismatch { found: String },

    #[error("index file truncated: {0}")]
    Truncated(String),

    #[error("index file checksum mismatch")]
    ChecksumMismatch,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Argument(_) => ErrorCategory::Argument,
            Error::Contract(_) => ErrorCategory::Internal,
            _ => ErrorCategory::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
