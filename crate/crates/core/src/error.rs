use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator, the transport solvers and the experiment driver.
#[derive(Debug, Error)]
pub enum KacError {
    /// An argument fell outside the domain of a mathematical function.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// An invalid simulation or experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Two empirical measures that must have equal sizes do not.
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    /// A fit or statistic that is undefined for the supplied data.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed config {path}: {detail}")]
    Parse { path: PathBuf, detail: String },
}

pub type Result<T> = std::result::Result<T, KacError>;

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> KacError {
    KacError::Domain {
        op,
        detail: detail.into(),
    }
}
