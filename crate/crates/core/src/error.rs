use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("unstable reshape {rows}x{cols}: rows must not exceed columns (override with allow_unstable)")]
    UnstableShape { rows: usize, cols: usize },
    #[error("no valid reshape for width {0}: it has no factor pair with at least two rows")]
    NoValidShape(usize),
    #[error("label {label} out of range for {num_labels} labels")]
    InvalidLabel { label: usize, num_labels: usize },
    #[error("format error: {0}")]
    Format(String),
    #[error("corrupt file: {0}")]
    CorruptFile(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("label mapping error: {0}")]
    Mapping(String),
    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("gain undefined: baseline macro F1 is zero")]
    UndefinedGain,
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// True for errors caused by unreadable or malformed files.
    pub fn is_format_error(&self) -> bool {
        matches!(
            self,
            Error::Format(_) | Error::CorruptFile(_) | Error::Parse(_) | Error::Io(_) | Error::Json(_)
        )
    }
}
