//! Error type shared by every module.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} out of range: {value} not in [{min}, {max}]")]
    Bounds {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("format error at row {row}, column '{column}': {message}")]
    Format {
        row: usize,
        column: String,
        message: String,
    },
    #[error("no usable rows: {0}")]
    EmptyData(String),
    #[error("invalid dataset: {0}")]
    InvalidData(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("synthetic generation failed: {0}")]
    Generation(String),
    #[error("training failed: {0}")]
    Training(String),
    #[error("AUC undefined: {0}")]
    UndefinedAuc(String),
    #[error("cannot stratify: {0}")]
    Stratification(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Broad failure classes, mapped to process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numeric,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::Json(_) | Error::Bounds { .. } => ErrorClass::Config,
            Error::Schema(_)
            | Error::Format { .. }
            | Error::EmptyData(_)
            | Error::InvalidData(_)
            | Error::DegenerateSample(_)
            | Error::Stratification(_)
            | Error::Shape(_)
            | Error::Io { .. } => ErrorClass::Data,
            Error::Generation(_)
            | Error::Training(_)
            | Error::UndefinedAuc(_)
            | Error::Domain(_) => ErrorClass::Numeric,
            Error::Stage { source, .. } => source.class(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numeric => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
