use std::cmp::Ordering;
use std::fmt;

use super::BaseType;

/// A path in a schema: a source node, a sequence of composable edges, and
/// optionally a terminal attribute. No steps and no terminal is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    pub source: String,
    pub steps: Vec<String>,
    pub terminal: Option<String>,
}

impl Path {
    pub fn id(node: impl Into<String>) -> Path {
        Path { source: node.into(), steps: Vec::new(), terminal: None }
    }

    pub fn edges<I, S>(source: impl Into<String>, steps: I) -> Path
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Path {
            source: source.into(),
            steps: steps.into_iter().map(Into::into).collect(),
            terminal: None,
        }
    }

    pub fn with_terminal(mut self, attribute: impl Into<String>) -> Path {
        self.terminal = Some(attribute.into());
        self
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty() && self.terminal.is_none()
    }

    pub fn is_node_valued(&self) -> bool {
        self.terminal.is_none()
    }

    /// Word length: steps plus the terminal attribute, if any.
    pub fn len(&self) -> usize {
        self.steps.len() + usize::from(self.terminal.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn symbols(&self) -> impl Iterator<Item = &str> {
        self.steps.iter().map(String::as_str).chain(self.terminal.as_deref())
    }

    /// Length-lexicographic order on words from the same source: shorter
    /// first, ties broken by the name sequence.
    pub fn length_lex_cmp(&self, other: &Path) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.symbols().cmp(other.symbols()))
            .then_with(|| self.source.cmp(&other.source))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        self.source.cmp(&other.source).then_with(|| self.length_lex_cmp(other))
    }
}

/// Dotted form `Source.step.step.attribute`; identity prints as the bare node.
impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)?;
        for s in self.symbols() {
            write!(f, ".{s}")?;
        }
        Ok(())
    }
}

/// What a path lands on: a node, or a value of a base type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Node(String),
    Value(BaseType),
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Node(n) => write!(f, "node {n}"),
            Sort::Value(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathEquation {
    pub lhs: Path,
    pub rhs: Path,
}

impl PathEquation {
    pub fn new(lhs: Path, rhs: Path) -> Self {
        PathEquation { lhs, rhs }
    }
}

impl fmt::Display for PathEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}
