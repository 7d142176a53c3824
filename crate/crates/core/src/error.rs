use std::fmt;

use thiserror::Error;

/// A position in source text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn new(line: usize, col: usize) -> Self {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{span}: {message}")]
    Lex { span: Span, message: String },

    #[error("{span}: {message}")]
    Parse { span: Span, message: String },

    #[error("{0}")]
    Desugar(String),

    #[error("{0}")]
    IndexArity(String),

    #[error("{0}")]
    Bounds(String),

    #[error("{0}")]
    ShapeMismatch(String),

    #[error("{0}")]
    Index(String),

    #[error("{0}")]
    Arithmetic(String),

    #[error("{0}")]
    Type(String),

    #[error("{0}")]
    Arity(String),

    #[error("{0}")]
    Unbound(String),

    #[error("{0}")]
    Completion(String),

    #[error("{0}")]
    Degree(String),

    #[error("{0}")]
    Domain(String),

    #[error("{span}: {source}")]
    At {
        span: Span,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Short, stable name of the error class, used in diagnostics.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Lex { .. } => "lex",
            Error::Parse { .. } => "parse",
            Error::Desugar(_) => "desugar",
            Error::IndexArity(_) => "index-arity",
            Error::Bounds(_) => "bounds",
            Error::ShapeMismatch(_) => "shape-mismatch",
            Error::Index(_) => "index",
            Error::Arithmetic(_) => "arithmetic",
            Error::Type(_) => "type",
            Error::Arity(_) => "arity",
            Error::Unbound(_) => "unbound-variable",
            Error::Completion(_) => "completion-mismatch",
            Error::Degree(_) => "degree",
            Error::Domain(_) => "domain",
            Error::At { source, .. } => source.class(),
        }
    }

    /// Attach a source location unless one is already present.
    pub fn at(self, span: Span) -> Error {
        match self {
            e @ (Error::At { .. } | Error::Lex { .. } | Error::Parse { .. }) => e,
            e => Error::At {
                span,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, with any location wrapper removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
