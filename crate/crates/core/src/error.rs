use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = SmspError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SmspError {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("no separating cut found after {attempts} proposals")]
    CutFailure { attempts: usize },

    #[error("count mismatch: {0}")]
    CountMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("{path}: malformed input at byte {offset}: {reason}")]
    Malformed {
        path: PathBuf,
        offset: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl SmspError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SmspError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by reading or writing files.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            SmspError::Io { .. } | SmspError::Malformed { .. } | SmspError::Csv(_) | SmspError::Json(_)
        )
    }

    /// True for failures of the numerical machinery itself rather than of inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SmspError::CutFailure { .. } | SmspError::CountMismatch(_) | SmspError::InvalidCurve(_)
        )
    }
}
