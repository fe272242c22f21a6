use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("parameter {name} = {value} outside its domain ({domain})")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("degenerate hyperplane: normal vector is zero")]
    DegenerateHyperplane,

    #[error("degenerate row {row}: zero row with zero regularization")]
    DegenerateRow { row: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("malformed matrix file at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("no successful records to select from")]
    EmptySelection,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dim(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            actual,
        }
    }
}

/// Fails with a dimension error unless `expected == actual`.
pub(crate) fn ensure_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::dim(context, expected, actual))
    }
}
