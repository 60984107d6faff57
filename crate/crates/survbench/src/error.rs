//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed CSV input (ragged row, bad UTF-8, ...).
    #[error("parse error at data row {row}: {msg}")]
    Parse { row: usize, msg: String },

    /// Structural problem with the table (duplicate columns, bad target, ...).
    #[error("schema error: {0}")]
    Schema(String),

    /// A cell could not be encoded into the feature matrix.
    #[error("encode error at row {row}, column `{column}`: {msg}")]
    Encode {
        row: usize,
        column: String,
        msg: String,
    },

    /// Dimension mismatch between matrices, label vectors or column sets.
    #[error("shape error: {0}")]
    Shape(String),

    /// A train/test partition could not be formed as requested.
    #[error("split error: {0}")]
    Split(String),

    /// Invalid hyperparameter, fraction, fold count or other setting.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// Feature scoring failed (single class, non-finite column, ...).
    #[error("scoring error: {0}")]
    Score(String),

    /// Metric or cross-validation failure.
    #[error("evaluation error: {0}")]
    Eval(String),

    /// Training produced a non-finite loss.
    #[error("training diverged: {0}")]
    Divergence(String),

    /// Persisted model document is malformed or has an unsupported version.
    #[error("model format error: {0}")]
    ModelFormat(String),

    /// Error raised by a pipeline stage, tagged with the stage name.
    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code for the CLI: 1 for configuration problems,
    /// 2 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Param(_) | Error::Divergence(_) => 1,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
