//! `.rts` text format: a line-oriented description of transactions,
//! external arrival patterns, actions and sub-actions.
//!
//! ```text
//! system "<name>"
//! transaction <Id> {
//!   external <EventId> (periodic period=<T> [jitter=<J>]
//!                      | aperiodic min_interarrival=<T> [jitter=<J>]
//!                      | sporadic outer=<T> inner=<t> burst=<n> [jitter=<J>])
//!   action <ActionId> trigger=<EventId> owner=<Capsule> priority=<p> deadline=<D> {
//!     sub <SubId> exec=<C> [emits (signal|call) <EventId>] [reply]
//!   }
//! }
//! ```
//!
//! `#` starts a comment. Keywords are lowercase. Larger priority numbers are
//! more urgent. Internal events are declared by their `emits` site.

mod lexer;
mod parser;
mod render;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use parser::parse;
pub use render::render;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    /// 1-based line.
    pub line: usize,
    /// 1-based column, counted in characters.
    pub column: usize,
    /// Byte offset of the first byte.
    pub start: usize,
    /// Byte offset one past the last byte.
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ParseErrorCode {
    EmptyModel,
    UnexpectedToken,
    UnexpectedEof,
    InvalidCharacter,
    UnterminatedString,
    InvalidNumber,
    MissingAttribute,
    DuplicateAttribute,
    UnknownAttribute,
    DuplicateId,
    DanglingRef,
}

impl ParseErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorCode::EmptyModel => "EMPTY_MODEL",
            ParseErrorCode::UnexpectedToken => "UNEXPECTED_TOKEN",
            ParseErrorCode::UnexpectedEof => "UNEXPECTED_EOF",
            ParseErrorCode::InvalidCharacter => "INVALID_CHARACTER",
            ParseErrorCode::UnterminatedString => "UNTERMINATED_STRING",
            ParseErrorCode::InvalidNumber => "INVALID_NUMBER",
            ParseErrorCode::MissingAttribute => "MISSING_ATTRIBUTE",
            ParseErrorCode::DuplicateAttribute => "DUPLICATE_ATTRIBUTE",
            ParseErrorCode::UnknownAttribute => "UNKNOWN_ATTRIBUTE",
            ParseErrorCode::DuplicateId => "DUPLICATE_ID",
            ParseErrorCode::DanglingRef => "DANGLING_REF",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub code: ParseErrorCode,
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn new(code: ParseErrorCode, span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            code,
            span,
            message: message.into(),
            expected: Vec::new(),
        }
    }

    pub(crate) fn expecting(mut self, expected: &[&str]) -> Self {
        self.expected = expected.iter().map(|s| (*s).to_owned()).collect();
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.span.line,
            self.span.column,
            self.code.as_str(),
            self.message
        )?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}
