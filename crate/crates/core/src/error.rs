use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Line/column position in a source text, 1-based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    // schemas and paths
    #[error("invalid schema `{schema}`: {reason}")]
    InvalidSchema { schema: String, reason: String },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{node}` has no edge or attribute named `{name}`")]
    UnknownStep { node: String, name: String },
    #[error("ill-formed path: {0}")]
    IllFormedPath(String),
    #[error("path sort mismatch: {0}")]
    SortMismatch(String),
    #[error("path normalization inconclusive after {bound} rewrite steps (path `{path}`)")]
    NormalizationInconclusive { path: String, bound: usize },
    #[error("schema has (potentially) infinitely many morphisms {from}\u{2192}{to} (bound {bound})")]
    InfiniteHomSet { from: String, to: String, bound: usize },

    // mappings
    #[error("invalid mapping `{mapping}`: {reason}")]
    InvalidMapping { mapping: String, reason: String },
    #[error("mapping `{mapping}` does not preserve equation {equation}")]
    EquationNotPreserved { mapping: String, equation: String },
    #[error("schema mismatch: expected `{expected}`, found `{found}`")]
    SchemaMismatch { expected: String, found: String },

    // instances
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("equation {equation} violated at node `{node}`, row {row}")]
    EquationViolated { equation: String, node: String, row: String },
    #[error("homomorphism count exceeds limit {0}")]
    HomLimitExceeded(usize),

    // migrations
    #[error("sigma: inconsistent attribute, constants {first} and {second} are forced equal")]
    AttributeClash { first: String, second: String },
    #[error("pi: attribute `{attribute}` at node `{node}` is not determined by any source attribute")]
    UndeterminedAttribute { node: String, attribute: String },

    // query language
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("query error: {0}")]
    Query(String),
    #[error("not desugarable; use direct evaluation ({0})")]
    NotDesugarable(String),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("`{0}` is already defined")]
    Redefinition(String),
    #[error("`{name}` is a {found}, expected a {expected}")]
    WrongKind { name: String, expected: &'static str, found: &'static str },
    #[error("at {pos}: {source}")]
    At {
        pos: Pos,
        #[source]
        source: Box<Error>,
    },

    // sql
    #[error("sql error at {pos}: {message}")]
    SqlSyntax { pos: Pos, message: String },
    #[error("unsupported SQL construct: {0}")]
    SqlUnsupported(String),
    #[error("sql import: {0}")]
    SqlImport(String),

    #[error("enrichment: {0}")]
    Enrichment(String),
    #[error("render: {0}")]
    Render(String),
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// True for failures that indicate a bug in the engine rather than bad input.
    pub fn is_internal(&self) -> bool {
        match self {
            Error::Internal(_) => true,
            Error::At { source, .. } => source.is_internal(),
            _ => false,
        }
    }

    pub(crate) fn at(self, pos: Pos) -> Error {
        match self {
            e @ Error::At { .. } => e,
            e => Error::At { pos, source: Box::new(e) },
        }
    }
}
