use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{}:{line}:{col}: syntax error: {message}", path.display())]
    Syntax {
        path: PathBuf,
        line: usize,
        col: usize,
        message: String,
    },

    #[error("overlapping edits at bytes {first:?} and {second:?}")]
    Overlap {
        first: (usize, usize),
        second: (usize, usize),
    },

    #[error("edit range {start}..{end} is outside the {len}-byte source")]
    EditOutOfBounds { start: usize, end: usize, len: usize },

    #[error("IR verification failed: {}", violations.join("; "))]
    Verification { violations: Vec<String> },

    #[error("{path}:{line}: {message}")]
    Config {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
