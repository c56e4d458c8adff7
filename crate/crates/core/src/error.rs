use std::io;

use thiserror::Error;

use crate::model::Diagnostic;

/// A text-level rejection pointing at a 1-based line and byte column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseDiagnostic {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            line,
            column,
            message: message.into(),
        }
    }
}

/// A binary-level rejection at an absolute byte offset.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset}")]
pub struct DecodeError {
    pub offset: u64,
    pub message: String,
}

impl DecodeError {
    pub fn new(offset: u64, message: impl Into<String>) -> Self {
        DecodeError {
            offset,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SddsError {
    #[error("header: {0}")]
    Header(ParseDiagnostic),
    #[error("data: {0}")]
    Ascii(ParseDiagnostic),
    #[error("data: {0}")]
    Binary(DecodeError),
    #[error("invalid schema: {0}")]
    InvalidSchema(Diagnostic),
    #[error("invalid page {page}: {diagnostic}")]
    InvalidPage { page: usize, diagnostic: Diagnostic },
    #[error("cannot encode: {0}")]
    Encode(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = SddsError> = std::result::Result<T, E>;
