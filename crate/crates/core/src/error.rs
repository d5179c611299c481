use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("unknown feature `{name}`; expected one of [{}]", expected.join(", "))]
    UnknownFeature { name: String, expected: Vec<String> },

    #[error("missing feature(s) [{}]; expected [{}]", missing.join(", "), expected.join(", "))]
    MissingFeatures {
        missing: Vec<String>,
        expected: Vec<String>,
    },

    #[error("cholesky factorization failed after jitter {jitter:e}")]
    Cholesky { jitter: f64 },

    #[error("optimizer diverged at log-hyperparameters {state:?}")]
    Divergence { state: Vec<f64> },

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    TrainingDivergence { epoch: usize },

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("corrupt model file: {0}")]
    Corrupt(String),

    #[error("dataset too large: {rows} rows exceeds limit {limit}")]
    SizeGuard { rows: usize, limit: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Cholesky { .. } | Error::Divergence { .. } | Error::TrainingDivergence { .. }
        )
    }
}
