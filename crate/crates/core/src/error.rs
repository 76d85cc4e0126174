use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("NameCollision: `{0}` uses a reserved concept-name prefix")]
    NameCollision(String),

    #[error("InconsistentInput: the ABox is inconsistent with the TBox")]
    InconsistentInput,

    #[error("NotBoolean: query has answer variables {0:?}")]
    NotBoolean(Vec<String>),

    #[error("NotTreeShaped: the Gaifman graph of the query is not a tree")]
    NotTreeShaped,

    #[error("Disconnected: the query has {0} connected components")]
    Disconnected(usize),

    #[error("InfiniteDepth: the TBox has depth omega")]
    InfiniteDepth,

    #[error("InvalidUserDecomposition: {0}")]
    InvalidUserDecomposition(String),

    #[error("NoSplitter: no node splits subtree {0:?}")]
    NoSplitter(Vec<usize>),

    #[error("OutOfRange: {0}")]
    OutOfRange(String),

    #[error("RecursionDetected: cycle {0:?}")]
    RecursionDetected(Vec<String>),

    #[error("UnsafeHead: variable `{variable}` of head `{head}` does not occur in the body")]
    UnsafeHead { head: String, variable: String },

    #[error("OrderedViolation: {0}")]
    OrderedViolation(String),

    #[error("NotLinear: clause `{0}` has more than one IDB body atom")]
    NotLinear(String),

    #[error("NotOrdered: {0}")]
    NotOrdered(String),

    #[error("NotSkinny: clause `{0}` has more than two body atoms")]
    NotSkinny(String),

    #[error("ArityMismatch: `{predicate}` expects {expected} arguments, got {found}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },

    #[error("EqualityInHead: equality cannot be a clause head")]
    EqualityInHead,
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Precondition,
    Semantic,
}

impl Error {
    pub fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } | Error::NameCollision(_) | Error::InvalidUserDecomposition(_) => {
                ErrorKind::Parse
            }
            Error::InconsistentInput => ErrorKind::Semantic,
            _ => ErrorKind::Precondition,
        }
    }
}
