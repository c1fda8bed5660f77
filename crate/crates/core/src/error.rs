use std::fmt;

use thiserror::Error;

/// Byte offsets into a source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }

    pub fn point(at: usize) -> Self {
        SourceSpan { start: at, end: at }
    }

    pub fn join(self, other: SourceSpan) -> SourceSpan {
        SourceSpan {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
}

impl ParseError {
    pub fn new(message: impl Into<String>, span: SourceSpan) -> Self {
        ParseError {
            message: message.into(),
            span,
        }
    }

    /// Renders the diagnostic with a line/column position computed from `source`.
    pub fn render(&self, source: &str) -> String {
        let upto = &source[..self.span.start.min(source.len())];
        let line = upto.matches('\n').count() + 1;
        let col = upto.len() - upto.rfind('\n').map_or(0, |i| i + 1) + 1;
        format!("{}:{}: {}", line, col, self.message)
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at {})", self.message, self.span)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("arity mismatch: operation expects {expected} arguments, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("malformed operation payload: {0}")]
    MalformedPayload(String),
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    #[error("map is not monotone: {0}")]
    NonMonotoneMap(String),
    #[error("generator `{0}` is ordered against other generators; fixed points and substitution need an order-isolated generator")]
    NotIsolated(String),
    #[error("resource limit exceeded: {what} (limit {limit})")]
    ResourceLimit { what: String, limit: usize },
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("indeterminate `{indeterminate}` is unguarded in the equation for `{equation}`")]
    Unguarded {
        indeterminate: String,
        equation: String,
    },
    #[error("not monotone: {0}")]
    NotMonotone(String),
    #[error("reserved variable `{0}` used in input")]
    ReservedVariable(String),
    #[error("theory mismatch: {0}")]
    TheoryMismatch(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::ResourceLimit { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
