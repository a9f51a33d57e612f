use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("non-manifold mesh: {0}")]
    NonManifold(String),

    #[error("isolated vertices with no incident area: {0:?}")]
    IsolatedVertices(Vec<usize>),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("malformed {kind} file {path}: {message}")]
    Format {
        kind: &'static str,
        path: PathBuf,
        message: String,
    },

    #[error("Nyquist violation: range {range_m:.4} m gives beat frequency {beat_hz:.1} Hz above limit {limit_hz:.1} Hz")]
    Nyquist {
        range_m: f64,
        beat_hz: f64,
        limit_hz: f64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite gradient in {term} at iteration {iteration}")]
    NonFinite { term: String, iteration: usize },

    #[error("divergence at iteration {iteration}: total loss {value:.4e} exceeds 10x reference {reference:.4e}")]
    Diverged {
        iteration: usize,
        value: f64,
        reference: f64,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category, used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidMesh(_)
            | Error::NonManifold(_)
            | Error::IsolatedVertices(_)
            | Error::Degenerate(_) => "mesh",
            Error::OutOfRange(_) | Error::Config(_) => "config",
            Error::Parse { .. } | Error::Format { .. } => "format",
            Error::Nyquist { .. } | Error::Dimension(_) => "input",
            Error::NonFinite { .. } | Error::Diverged { .. } => "numeric",
            Error::Io { .. } => "io",
        }
    }
}
