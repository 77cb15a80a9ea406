use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CdmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CdmError {
    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Dataset construction violated an invariant.
    #[error("invalid dataset: {0}")]
    Data(String),

    #[error("schema error: column `{column}` not found in header")]
    MissingColumn { column: String },

    #[error("row {row} (line {line}): {message}")]
    Row {
        row: usize,
        line: usize,
        message: String,
    },

    /// An estimator or metric needs propensities the dataset does not carry.
    #[error("missing propensity: {0}")]
    MissingPropensity(String),

    /// An oracle metric was asked for on data without potential outcomes.
    #[error("{0} requires a synthetic dataset with potential outcomes")]
    NotSynthetic(&'static str),

    /// A learner or metric precondition failed on otherwise valid input.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CdmError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CdmError::Io {
            path: path.into(),
            source,
        }
    }
}
