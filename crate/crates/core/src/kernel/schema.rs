use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::path::{Path, PathEquation, Sort};
use super::rewrite::Rule;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseType {
    String,
    Integer,
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseType::String => "string",
            BaseType::Integer => "integer",
        })
    }
}

impl std::str::FromStr for BaseType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "string" => Ok(BaseType::String),
            "integer" => Ok(BaseType::Integer),
            other => Err(Error::InvalidSchema {
                schema: String::new(),
                reason: format!("unknown base type `{other}` (expected string or integer)"),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub name: String,
    pub source: String,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Attribute {
    pub name: String,
    pub source: String,
    pub ty: BaseType,
}

/// A finitely presented category: a multigraph of nodes and edges, typed
/// attributes hanging off nodes, and equations between paths.
///
/// Edge and attribute names share one namespace per source node, so a dotted
/// path `Node.a.b.c` resolves without ambiguity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    name: String,
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), Edge>,
    attributes: BTreeMap<(String, String), Attribute>,
    equations: Vec<PathEquation>,
    pub(super) rules: Vec<Rule>,
}

impl Schema {
    pub fn builder(name: impl Into<String>) -> SchemaBuilder {
        SchemaBuilder::new(name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn has_node(&self, node: &str) -> bool {
        self.nodes.contains(node)
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn attributes(&self) -> impl Iterator<Item = &Attribute> {
        self.attributes.values()
    }

    pub fn equations(&self) -> &[PathEquation] {
        &self.equations
    }

    pub fn edge(&self, node: &str, name: &str) -> Option<&Edge> {
        self.edges.get(&(node.to_owned(), name.to_owned()))
    }

    pub fn attribute(&self, node: &str, name: &str) -> Option<&Attribute> {
        self.attributes.get(&(node.to_owned(), name.to_owned()))
    }

    /// Outgoing edges of `node`, ordered by name.
    pub fn edges_from<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.values().filter(move |e| e.source == node)
    }

    /// Attributes of `node`, ordered by name.
    pub fn attributes_of<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a Attribute> + 'a {
        self.attributes.values().filter(move |a| a.source == node)
    }

    /// Resolves a dotted name sequence starting at `source`: every name but the
    /// last must be an edge, the last may be an edge or an attribute.
    pub fn resolve_path<S: AsRef<str>>(&self, source: &str, names: &[S]) -> Result<Path> {
        if !self.has_node(source) {
            return Err(Error::UnknownNode(source.to_owned()));
        }
        let mut path = Path::id(source);
        let mut at = source.to_owned();
        for (i, name) in names.iter().enumerate() {
            let name = name.as_ref();
            if let Some(e) = self.edge(&at, name) {
                path.steps.push(name.to_owned());
                at = e.target.clone();
            } else if self.attribute(&at, name).is_some() && i + 1 == names.len() {
                path.terminal = Some(name.to_owned());
            } else if self.attribute(&at, name).is_some() {
                return Err(Error::IllFormedPath(format!(
                    "attribute `{name}` must end the path"
                )));
            } else {
                return Err(Error::UnknownStep { node: at, name: name.to_owned() });
            }
        }
        Ok(path)
    }

    /// Parses `Node.a.b` against this schema.
    pub fn parse_path(&self, dotted: &str) -> Result<Path> {
        let mut parts = dotted.split('.');
        let source = parts.next().unwrap_or_default();
        let names: Vec<&str> = parts.collect();
        self.resolve_path(source, &names)
    }

    /// Node sequence visited by `path`: one entry per position, so the result
    /// has `steps.len() + 1` entries.
    pub(crate) fn path_nodes(&self, path: &Path) -> Result<Vec<String>> {
        if !self.has_node(&path.source) {
            return Err(Error::UnknownNode(path.source.clone()));
        }
        let mut nodes = Vec::with_capacity(path.steps.len() + 1);
        nodes.push(path.source.clone());
        for step in &path.steps {
            let at = nodes.last().expect("nonempty");
            let e = self
                .edge(at, step)
                .ok_or_else(|| Error::UnknownStep { node: at.clone(), name: step.clone() })?;
            nodes.push(e.target.clone());
        }
        Ok(nodes)
    }

    /// The sort a well-formed path lands on; errors if the path does not
    /// type-check in this schema.
    pub fn target(&self, path: &Path) -> Result<Sort> {
        let nodes = self.path_nodes(path)?;
        let end = nodes.last().expect("nonempty");
        match &path.terminal {
            None => Ok(Sort::Node(end.clone())),
            Some(a) => self
                .attribute(end, a)
                .map(|a| Sort::Value(a.ty))
                .ok_or_else(|| Error::UnknownStep { node: end.clone(), name: a.clone() }),
        }
    }

    pub(crate) fn target_node(&self, path: &Path) -> Result<String> {
        match self.target(path)? {
            Sort::Node(n) => Ok(n),
            Sort::Value(_) => Err(Error::SortMismatch(format!("`{path}` is attribute-valued"))),
        }
    }

    /// Composes `p` then `q`. Identity paths are two-sided units.
    pub fn compose(&self, p: &Path, q: &Path) -> Result<Path> {
        let mid = match self.target(p)? {
            Sort::Node(n) => n,
            Sort::Value(_) => {
                return Err(Error::SortMismatch(format!(
                    "cannot compose after attribute-valued path `{p}`"
                )))
            }
        };
        self.target(q)?;
        if mid != q.source {
            return Err(Error::SortMismatch(format!(
                "`{p}` ends at `{mid}` but `{q}` starts at `{}`",
                q.source
            )));
        }
        let mut steps = p.steps.clone();
        steps.extend(q.steps.iter().cloned());
        Ok(Path { source: p.source.clone(), steps, terminal: q.terminal.clone() })
    }

    /// Nodes reachable from `from` (including itself) along edges.
    pub(crate) fn reachable(&self, from: impl IntoIterator<Item = String>) -> BTreeSet<String> {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut stack: Vec<String> = from.into_iter().collect();
        while let Some(n) = stack.pop() {
            if seen.insert(n.clone()) {
                stack.extend(self.edges_from(&n).map(|e| e.target.clone()));
            }
        }
        seen
    }

    /// Nodes from which some attribute is reachable.
    pub(crate) fn observable_nodes(&self) -> BTreeSet<String> {
        self.nodes
            .iter()
            .filter(|n| self.reachable([(*n).clone()]).iter().any(|m| self.attributes_of(m).next().is_some()))
            .cloned()
            .collect()
    }
}

#[derive(Clone, Debug)]
enum PendingEquation {
    Paths(Path, Path),
    Dotted(String, String),
}

/// Incremental construction of a [`Schema`]; all checks happen in [`build`](Self::build).
#[derive(Clone, Debug)]
pub struct SchemaBuilder {
    name: String,
    nodes: Vec<String>,
    edges: Vec<Edge>,
    attributes: Vec<Attribute>,
    equations: Vec<PendingEquation>,
}

impl SchemaBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        SchemaBuilder {
            name: name.into(),
            nodes: Vec::new(),
            edges: Vec::new(),
            attributes: Vec::new(),
            equations: Vec::new(),
        }
    }

    pub fn node(mut self, name: impl Into<String>) -> Self {
        self.nodes.push(name.into());
        self
    }

    pub fn edge(mut self, name: impl Into<String>, source: impl Into<String>, target: impl Into<String>) -> Self {
        self.edges.push(Edge { name: name.into(), source: source.into(), target: target.into() });
        self
    }

    pub fn attribute(mut self, name: impl Into<String>, source: impl Into<String>, ty: BaseType) -> Self {
        self.attributes.push(Attribute { name: name.into(), source: source.into(), ty });
        self
    }

    pub fn equation(mut self, lhs: Path, rhs: Path) -> Self {
        self.equations.push(PendingEquation::Paths(lhs, rhs));
        self
    }

    /// Equation between two dotted paths, resolved when the schema is built.
    pub fn equation_dotted(mut self, lhs: impl Into<String>, rhs: impl Into<String>) -> Self {
        self.equations.push(PendingEquation::Dotted(lhs.into(), rhs.into()));
        self
    }

    pub fn build(self) -> Result<Schema> {
        let invalid = |reason: String| Error::InvalidSchema { schema: self.name.clone(), reason };
        let mut nodes = BTreeSet::new();
        for n in &self.nodes {
            if !nodes.insert(n.clone()) {
                return Err(invalid(format!("duplicate node `{n}`")));
            }
        }
        let mut edges = BTreeMap::new();
        let mut attributes = BTreeMap::new();
        let mut taken: BTreeSet<(String, String)> = BTreeSet::new();
        for e in self.edges.iter().cloned() {
            for end in [&e.source, &e.target] {
                if !nodes.contains(end) {
                    return Err(invalid(format!("edge `{}` mentions unknown node `{end}`", e.name)));
                }
            }
            let key = (e.source.clone(), e.name.clone());
            if !taken.insert(key.clone()) {
                return Err(invalid(format!("duplicate name `{}` on node `{}`", e.name, e.source)));
            }
            edges.insert(key, e);
        }
        for a in self.attributes.iter().cloned() {
            if !nodes.contains(&a.source) {
                return Err(invalid(format!("attribute `{}` on unknown node `{}`", a.name, a.source)));
            }
            let key = (a.source.clone(), a.name.clone());
            if !taken.insert(key.clone()) {
                return Err(invalid(format!("duplicate name `{}` on node `{}`", a.name, a.source)));
            }
            attributes.insert(key, a);
        }
        let mut schema = Schema {
            name: self.name.clone(),
            nodes,
            edges,
            attributes,
            equations: Vec::new(),
            rules: Vec::new(),
        };
        for eq in self.equations {
            let (lhs, rhs) = match eq {
                PendingEquation::Paths(l, r) => (l, r),
                PendingEquation::Dotted(l, r) => (
                    schema.parse_path(&l).map_err(|e| invalid(e.to_string()))?,
                    schema.parse_path(&r).map_err(|e| invalid(e.to_string()))?,
                ),
            };
            let ls = schema.target(&lhs).map_err(|e| invalid(e.to_string()))?;
            let rs = schema.target(&rhs).map_err(|e| invalid(e.to_string()))?;
            if lhs.source != rhs.source || ls != rs {
                return Err(invalid(format!(
                    "equation sides disagree: `{lhs}` : {} -> {ls} vs `{rhs}` : {} -> {rs}",
                    lhs.source, rhs.source
                )));
            }
            schema.equations.push(PathEquation { lhs, rhs });
        }
        schema.rules = super::rewrite::orient(&schema.equations);
        Ok(schema)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loop_schema() -> Schema {
        Schema::builder("S")
            .node("Material")
            .edge("parent", "Material", "Material")
            .attribute("name", "Material", BaseType::String)
            .build()
            .unwrap()
    }

    #[test]
    fn identity_is_a_two_sided_unit() {
        let s = loop_schema();
        let id = Path::id("Material");
        let parent = Path::edges("Material", ["parent"]);
        assert_eq!(s.compose(&id, &parent).unwrap(), parent);
        assert_eq!(s.compose(&parent, &id).unwrap(), parent);
        assert_eq!(
            s.compose(&parent, &parent).unwrap(),
            Path::edges("Material", ["parent", "parent"])
        );
    }

    #[test]
    fn compose_rejects_attribute_valued_prefix_and_endpoint_mismatch() {
        let s = Schema::builder("X")
            .node("A")
            .node("B")
            .edge("f", "A", "B")
            .attribute("a", "A", BaseType::Integer)
            .build()
            .unwrap();
        let a = Path::id("A").with_terminal("a");
        let f = Path::edges("A", ["f"]);
        assert!(matches!(s.compose(&a, &f), Err(Error::SortMismatch(_))));
        assert!(matches!(s.compose(&f, &f), Err(Error::SortMismatch(_))));
    }

    #[test]
    fn names_are_unique_per_source_node_only() {
        let ok = Schema::builder("X")
            .node("A")
            .node("B")
            .edge("f", "A", "B")
            .edge("f", "B", "A")
            .build();
        assert!(ok.is_ok());
        let clash = Schema::builder("X")
            .node("A")
            .edge("f", "A", "A")
            .attribute("f", "A", BaseType::String)
            .build();
        assert!(clash.is_err());
    }

    #[test]
    fn equation_sides_must_share_sort() {
        let bad = Schema::builder("X")
            .node("A")
            .node("B")
            .edge("f", "A", "B")
            .equation_dotted("A.f", "A")
            .build();
        assert!(bad.is_err());
    }

    #[test]
    fn resolve_dotted_paths() {
        let s = loop_schema();
        let p = s.parse_path("Material.parent.parent.name").unwrap();
        assert_eq!(p.steps.len(), 2);
        assert_eq!(p.terminal.as_deref(), Some("name"));
        assert_eq!(s.target(&p).unwrap(), Sort::Value(BaseType::String));
        assert!(s.parse_path("Material.name.parent").is_err());
        assert!(s.parse_path("Material.nope").is_err());
    }
}
