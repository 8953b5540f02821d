use std::io;

use thiserror::Error;

/// Errors produced by the label-ranking library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate label {0} in ranking")]
    DuplicateLabel(usize),

    #[error("empty ranking")]
    EmptyRanking,

    #[error("label {label} out of range 1..={num_labels}")]
    LabelOutOfRange { label: usize, num_labels: usize },

    #[error("feature index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("label count mismatch: expected {expected}, found {found}")]
    LabelCountMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
