use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the counting, statistics and I/O layers.
#[derive(Debug, Error)]
pub enum OrdinalError {
    /// A parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Every triple of a window was excluded (ties or missing values).
    #[error("no valid triples at delay {delay}")]
    NoValidTriples { delay: usize },

    /// Every pair at the requested delay was excluded.
    #[error("all pairs excluded at delay {delay}")]
    AllPairsExcluded { delay: usize },

    /// An order-n histogram without a single counted window.
    #[error("no valid windows for order {order} at delay {delay}")]
    NoValidWindows { order: usize, delay: usize },

    /// Partition requested with distance zero and no gate.
    #[error("distance to white noise is exactly zero; partition undefined")]
    DivisionGuard,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: empty input")]
    EmptyInput(PathBuf),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl OrdinalError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        OrdinalError::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        OrdinalError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, OrdinalError>;
