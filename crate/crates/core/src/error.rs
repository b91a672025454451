//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by dataset ingestion, metric computation and the
/// sampling pipelines.
#[derive(Debug, Error)]
pub enum Error {
    /// The schema configuration and the data do not agree (missing column,
    /// unknown feature, protected feature declared numeric, ...).
    #[error("schema error: {0}")]
    Schema(String),

    /// The data violates a declared invariant (non-binary value in a binary
    /// column, more than two class values, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A cell could not be parsed as a number.
    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    /// A requested operation cannot be carried out on this data
    /// (e.g. fewer instances of a class than folds).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A metric is undefined for the given counts (empty protected group,
    /// no actual positives, ...).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Invalid configuration (percentile out of range, zero protected
    /// features, unknown strategy, ...).
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input data or schema (CLI exit code 2),
    /// as opposed to runtime failures (exit code 3).
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Schema(_) | Error::Validation(_) | Error::Parse { .. } | Error::Config(_)
        )
    }
}
