use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::path::{Path, Sort};
use super::schema::Schema;
use super::DEFAULT_PATH_BOUND;
use crate::error::{Error, Result};
use crate::value::Value;

/// Where a mapping sends an attribute: an attribute-valued path in the target
/// schema, or a constant of the attribute's type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AttrImage {
    Path(Path),
    Const(Value),
}

impl fmt::Display for AttrImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrImage::Path(p) => write!(f, "{p}"),
            AttrImage::Const(v) => write!(f, "{v}"),
        }
    }
}

/// A functor between schemas, given on generators: nodes to nodes, edges to
/// node-valued paths, attributes to attribute-valued paths (or constants).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mapping {
    name: String,
    source: Arc<Schema>,
    target: Arc<Schema>,
    nodes: BTreeMap<String, String>,
    edges: BTreeMap<(String, String), Path>,
    attributes: BTreeMap<(String, String), AttrImage>,
}

impl Mapping {
    pub fn builder(name: impl Into<String>, source: Arc<Schema>, target: Arc<Schema>) -> MappingBuilder {
        MappingBuilder {
            mapping: Mapping {
                name: name.into(),
                source,
                target,
                nodes: BTreeMap::new(),
                edges: BTreeMap::new(),
                attributes: BTreeMap::new(),
            },
            bound: DEFAULT_PATH_BOUND,
        }
    }

    pub fn identity(schema: Arc<Schema>) -> Mapping {
        let mut m = Mapping::builder(format!("id_{}", schema.name()), schema.clone(), schema.clone());
        for n in schema.nodes() {
            m = m.node(n, n);
        }
        for e in schema.edges() {
            m = m.edge(&e.source, &e.name, Path::edges(e.source.clone(), [e.name.clone()]));
        }
        for a in schema.attributes() {
            m = m.attribute_path(&a.source, &a.name, Path::id(a.source.clone()).with_terminal(a.name.clone()));
        }
        m.mapping
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &Arc<Schema> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Schema> {
        &self.target
    }

    pub fn node_image(&self, node: &str) -> Result<&str> {
        self.nodes
            .get(node)
            .map(String::as_str)
            .ok_or_else(|| self.invalid(format!("node `{node}` is not mapped")))
    }

    pub fn edge_image(&self, node: &str, edge: &str) -> Result<&Path> {
        self.edges
            .get(&(node.to_owned(), edge.to_owned()))
            .ok_or_else(|| self.invalid(format!("edge `{node}.{edge}` is not mapped")))
    }

    pub fn attribute_image(&self, node: &str, attr: &str) -> Result<&AttrImage> {
        self.attributes
            .get(&(node.to_owned(), attr.to_owned()))
            .ok_or_else(|| self.invalid(format!("attribute `{node}.{attr}` is not mapped")))
    }

    pub fn node_images(&self) -> impl Iterator<Item = (&str, &str)> {
        self.nodes.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn edge_images(&self) -> impl Iterator<Item = (&(String, String), &Path)> {
        self.edges.iter()
    }

    pub fn attribute_images(&self) -> impl Iterator<Item = (&(String, String), &AttrImage)> {
        self.attributes.iter()
    }

    fn invalid(&self, reason: String) -> Error {
        Error::InvalidMapping { mapping: self.name.clone(), reason }
    }

    /// Image of a source path. Node-valued paths always map to paths; an
    /// attribute-valued path maps to a constant when its attribute does.
    pub fn translate(&self, path: &Path) -> Result<AttrImage> {
        let nodes = self.source.path_nodes(path)?;
        let mut out = Path::id(self.node_image(&path.source)?);
        for (i, step) in path.steps.iter().enumerate() {
            let img = self.edge_image(&nodes[i], step)?;
            out.steps.extend(img.steps.iter().cloned());
        }
        match &path.terminal {
            None => Ok(AttrImage::Path(out)),
            Some(a) => match self.attribute_image(nodes.last().expect("nonempty"), a)? {
                AttrImage::Const(v) => Ok(AttrImage::Const(v.clone())),
                AttrImage::Path(p) => {
                    out.steps.extend(p.steps.iter().cloned());
                    out.terminal = p.terminal.clone();
                    Ok(AttrImage::Path(out))
                }
            },
        }
    }

    pub(crate) fn translate_node_path(&self, path: &Path) -> Result<Path> {
        match self.translate(path)? {
            AttrImage::Path(p) => Ok(p),
            AttrImage::Const(_) => Err(Error::SortMismatch(format!("`{path}` is not node-valued"))),
        }
    }

    /// Checks totality, endpoints, types and preservation of every source
    /// equation (up to provable equality in the target).
    pub fn validate(&self, bound: usize) -> Result<()> {
        let (s, t) = (&*self.source, &*self.target);
        for n in s.nodes() {
            let img = self.node_image(n)?;
            if !t.has_node(img) {
                return Err(self.invalid(format!("node `{n}` maps to unknown node `{img}`")));
            }
        }
        if self.nodes.len() != s.nodes().count() {
            return Err(self.invalid("node map mentions nodes outside the source".into()));
        }
        for e in s.edges() {
            let img = self.edge_image(&e.source, &e.name)?;
            let want_src = self.node_image(&e.source)?;
            let want_tgt = self.node_image(&e.target)?;
            let got = t.target(img).map_err(|err| self.invalid(format!("edge `{}`: {err}", e.name)))?;
            if img.source != want_src || got != Sort::Node(want_tgt.to_owned()) {
                return Err(self.invalid(format!(
                    "edge `{}.{}` : {} -> {} maps to `{img}`, which does not run {want_src} -> {want_tgt}",
                    e.source, e.name, e.source, e.target
                )));
            }
        }
        for a in s.attributes() {
            let want_src = self.node_image(&a.source)?;
            match self.attribute_image(&a.source, &a.name)? {
                AttrImage::Path(p) => {
                    let got = t.target(p).map_err(|err| self.invalid(format!("attribute `{}`: {err}", a.name)))?;
                    if p.source != want_src || got != Sort::Value(a.ty) {
                        return Err(self.invalid(format!(
                            "attribute `{}.{}` : {} maps to `{p}` of the wrong shape",
                            a.source, a.name, a.ty
                        )));
                    }
                }
                AttrImage::Const(v) => {
                    if !v.fits(a.ty) || v.is_null() {
                        return Err(self.invalid(format!(
                            "attribute `{}.{}` : {} maps to constant {v} of the wrong type",
                            a.source, a.name, a.ty
                        )));
                    }
                }
            }
        }
        if self.edges.len() != s.edges().count() || self.attributes.len() != s.attributes().count() {
            return Err(self.invalid("map mentions edges or attributes outside the source".into()));
        }
        for eq in s.equations() {
            let holds = match (self.translate(&eq.lhs)?, self.translate(&eq.rhs)?) {
                (AttrImage::Path(p), AttrImage::Path(q)) => t.paths_equal(&p, &q, bound)?,
                (AttrImage::Const(a), AttrImage::Const(b)) => a == b,
                _ => false,
            };
            if !holds {
                return Err(Error::EquationNotPreserved { mapping: self.name.clone(), equation: eq.to_string() });
            }
        }
        Ok(())
    }

    /// `self` followed by `next`: S -> T -> U.
    pub fn then(&self, next: &Mapping) -> Result<Mapping> {
        if *self.target != *next.source {
            return Err(Error::SchemaMismatch {
                expected: next.source.name().to_owned(),
                found: self.target.name().to_owned(),
            });
        }
        let mut out = Mapping::builder(
            format!("{}_{}", next.name, self.name),
            self.source.clone(),
            next.target.clone(),
        );
        for (n, img) in &self.nodes {
            out = out.node(n, next.node_image(img)?);
        }
        for ((src, e), img) in &self.edges {
            out = out.edge(src, e, next.translate_node_path(img)?);
        }
        for ((src, a), img) in &self.attributes {
            let composed = match img {
                AttrImage::Const(v) => AttrImage::Const(v.clone()),
                AttrImage::Path(p) => next.translate(p)?,
            };
            out.mapping.attributes.insert((src.clone(), a.clone()), composed);
        }
        out.build()
    }
}

/// Composes two mappings, `f` first; alias of [`Mapping::then`].
pub fn compose_mappings(f: &Mapping, g: &Mapping) -> Result<Mapping> {
    f.then(g)
}

pub struct MappingBuilder {
    mapping: Mapping,
    bound: usize,
}

impl MappingBuilder {
    pub fn node(mut self, from: &str, to: &str) -> Self {
        self.mapping.nodes.insert(from.to_owned(), to.to_owned());
        self
    }

    pub fn edge(mut self, node: &str, edge: &str, image: Path) -> Self {
        self.mapping.edges.insert((node.to_owned(), edge.to_owned()), image);
        self
    }

    /// Edge image given as a dotted target path, e.g. `Material.parent.parent`.
    pub fn edge_dotted(self, node: &str, edge: &str, image: &str) -> Result<Self> {
        let p = self.mapping.target.parse_path(image)?;
        Ok(self.edge(node, edge, p))
    }

    pub fn attribute_path(mut self, node: &str, attr: &str, image: Path) -> Self {
        self.mapping.attributes.insert((node.to_owned(), attr.to_owned()), AttrImage::Path(image));
        self
    }

    pub fn attribute_dotted(self, node: &str, attr: &str, image: &str) -> Result<Self> {
        let p = self.mapping.target.parse_path(image)?;
        Ok(self.attribute_path(node, attr, p))
    }

    pub fn attribute_const(mut self, node: &str, attr: &str, value: Value) -> Self {
        self.mapping.attributes.insert((node.to_owned(), attr.to_owned()), AttrImage::Const(value));
        self
    }

    pub fn bound(mut self, bound: usize) -> Self {
        self.bound = bound;
        self
    }

    pub fn build(self) -> Result<Mapping> {
        self.mapping.validate(self.bound)?;
        Ok(self.mapping)
    }

    /// Builds without validating; for tests that exercise [`Mapping::validate`].
    pub fn build_unchecked(self) -> Mapping {
        self.mapping
    }
}
