use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("value {value} exceeds the completeness bound {lambda_max}")]
    OutOfRange { value: f64, lambda_max: f64 },

    /// A query reached past the frequency below which the spectrum is known to be complete.
    #[error("query at {query} is beyond the completeness bound {lambda_max}")]
    Completeness { query: f64, lambda_max: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("unsupported order k = {k}: {reason}")]
    UnsupportedOrder { k: u32, reason: String },

    #[error("kernel invariant `{invariant}` failed: {detail}")]
    KernelInvariant {
        invariant: &'static str,
        detail: String,
    },

    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by asking about frequencies the data does not cover.
    pub fn is_completeness(&self) -> bool {
        matches!(self, Error::Completeness { .. } | Error::OutOfRange { .. })
    }
}
