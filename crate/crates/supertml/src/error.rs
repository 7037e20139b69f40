use std::path::PathBuf;

use supertml_core::format::FormatError;
use supertml_core::importance::ImportanceError;
use supertml_core::layout::{LayoutError, Violation};
use supertml_core::render::SampleError;
use supertml_core::schema::SchemaError;
use thiserror::Error;

/// Process exit codes of the `supertml` binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const IO: i32 = 3;
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("row {row}: {source}")]
    Render {
        row: usize,
        #[source]
        source: SampleError,
    },
    #[error(transparent)]
    Importance(#[from] ImportanceError),
    #[error("plan is invalid: {0:?}")]
    InvalidPlan(Vec<Violation>),
    #[error("labels `{first}` and `{second}` both sanitize to `{sanitized}`")]
    LabelCollision {
        first: String,
        second: String,
        sanitized: String,
    },
    #[error("{}: digest mismatch (expected {expected}, found {found})", path.display())]
    Integrity {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{}: {message}", path.display())]
    Manifest { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => exit::IO,
            Error::Usage(_) => exit::USAGE,
            _ => exit::DATA,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
