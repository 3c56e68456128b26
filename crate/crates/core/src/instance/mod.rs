//! Instances: set-valued functors on a schema with typed attributes.

mod morph;
mod ops;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::{Path, Schema};
use crate::value::Value;

pub use morph::{enumerate_homs, iso_check};
pub use ops::{disjoint_union, disjoint_union_all, relationalize, relationalize_with, union, union_all, Relationalized};

/// Opaque row identifier, unique within one node of one instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowId(pub u64);

impl fmt::Display for RowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Result of evaluating a path on a row.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Datum {
    Row(RowId),
    Value(Value),
}

pub(crate) type Key = (String, String);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    schema: Arc<Schema>,
    rows: BTreeMap<String, BTreeSet<RowId>>,
    edges: BTreeMap<Key, BTreeMap<RowId, RowId>>,
    attrs: BTreeMap<Key, BTreeMap<RowId, Value>>,
}

impl Instance {
    pub fn empty(schema: Arc<Schema>) -> Instance {
        Instance {
            rows: schema.nodes().map(|n| (n.to_owned(), BTreeSet::new())).collect(),
            edges: schema
                .edges()
                .map(|e| ((e.source.clone(), e.name.clone()), BTreeMap::new()))
                .collect(),
            attrs: schema
                .attributes()
                .map(|a| ((a.source.clone(), a.name.clone()), BTreeMap::new()))
                .collect(),
            schema,
        }
    }

    pub fn builder(schema: Arc<Schema>) -> InstanceBuilder {
        InstanceBuilder { inst: Instance::empty(schema) }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    /// Rows of `node` in ascending id order; empty for unknown nodes.
    pub fn rows(&self, node: &str) -> impl Iterator<Item = RowId> + '_ {
        self.rows.get(node).into_iter().flatten().copied()
    }

    pub fn row_count(&self, node: &str) -> usize {
        self.rows.get(node).map_or(0, BTreeSet::len)
    }

    pub fn total_rows(&self) -> usize {
        self.rows.values().map(BTreeSet::len).sum()
    }

    pub fn has_row(&self, node: &str, row: RowId) -> bool {
        self.rows.get(node).is_some_and(|r| r.contains(&row))
    }

    pub fn edge(&self, node: &str, edge: &str, row: RowId) -> Option<RowId> {
        self.edges.get(&(node.to_owned(), edge.to_owned()))?.get(&row).copied()
    }

    pub fn attr(&self, node: &str, attr: &str, row: RowId) -> Option<&Value> {
        self.attrs.get(&(node.to_owned(), attr.to_owned()))?.get(&row)
    }

    pub(crate) fn edge_fn(&self, node: &str, edge: &str) -> &BTreeMap<RowId, RowId> {
        &self.edges[&(node.to_owned(), edge.to_owned())]
    }

    pub(crate) fn attr_fn(&self, node: &str, attr: &str) -> &BTreeMap<RowId, Value> {
        &self.attrs[&(node.to_owned(), attr.to_owned())]
    }

    /// Folds the edge and attribute functions along `path`, starting at `row`.
    pub fn eval_path(&self, path: &Path, row: RowId) -> Result<Datum> {
        let nodes = self.schema.path_nodes(path)?;
        let mut at = row;
        if !self.has_row(&path.source, row) {
            return Err(Error::InvalidInstance(format!("no row {row} in `{}`", path.source)));
        }
        for (i, step) in path.steps.iter().enumerate() {
            at = self.edge(&nodes[i], step, at).ok_or_else(|| {
                Error::InvalidInstance(format!("edge `{}.{step}` undefined on row {at}", nodes[i]))
            })?;
        }
        match &path.terminal {
            None => Ok(Datum::Row(at)),
            Some(a) => {
                let end = nodes.last().expect("nonempty");
                self.attr(end, a, at)
                    .cloned()
                    .map(Datum::Value)
                    .ok_or_else(|| Error::InvalidInstance(format!("attribute `{end}.{a}` undefined on row {at}")))
            }
        }
    }

    /// [`eval_path`](Self::eval_path) for every row of the path's source, in
    /// row order. Each step's function is looked up once.
    pub(crate) fn eval_path_column(&self, path: &Path) -> Result<Vec<(RowId, Datum)>> {
        let nodes = self.schema.path_nodes(path)?;
        let mut at: Vec<(RowId, RowId)> = self.rows(&path.source).map(|r| (r, r)).collect();
        for (i, step) in path.steps.iter().enumerate() {
            let f = self.edge_fn(&nodes[i], step);
            for (_, y) in &mut at {
                *y = *f.get(y).ok_or_else(|| {
                    Error::InvalidInstance(format!("edge `{}.{step}` undefined on row {y}", nodes[i]))
                })?;
            }
        }
        match &path.terminal {
            None => Ok(at.into_iter().map(|(r, y)| (r, Datum::Row(y))).collect()),
            Some(a) => {
                let end = nodes.last().expect("nonempty");
                let f = self.attr_fn(end, a);
                at.into_iter()
                    .map(|(r, y)| {
                        f.get(&y).cloned().map(|v| (r, Datum::Value(v))).ok_or_else(|| {
                            Error::InvalidInstance(format!("attribute `{end}.{a}` undefined on row {y}"))
                        })
                    })
                    .collect()
            }
        }
    }

    /// Checks totality of every edge and attribute function, attribute types,
    /// and that every schema equation holds on every row.
    pub fn validate(&self) -> Result<()> {
        let s = &*self.schema;
        for n in s.nodes() {
            if !self.rows.contains_key(n) {
                return Err(Error::InvalidInstance(format!("missing row set for node `{n}`")));
            }
        }
        if self.rows.len() != s.nodes().count() {
            return Err(Error::InvalidInstance("row sets for nodes outside the schema".into()));
        }
        for e in s.edges() {
            let f = self
                .edges
                .get(&(e.source.clone(), e.name.clone()))
                .ok_or_else(|| Error::InvalidInstance(format!("missing edge function `{}`", e.name)))?;
            let dom = &self.rows[&e.source];
            if f.len() != dom.len() || !f.keys().all(|r| dom.contains(r)) {
                return Err(Error::InvalidInstance(format!(
                    "edge `{}.{}` is not total on the rows of `{}`",
                    e.source, e.name, e.source
                )));
            }
            for (x, y) in f {
                if !self.rows[&e.target].contains(y) {
                    return Err(Error::InvalidInstance(format!(
                        "dangling edge `{}.{}`: row {x} points to missing row {y} of `{}`",
                        e.source, e.name, e.target
                    )));
                }
            }
        }
        for a in s.attributes() {
            let f = self
                .attrs
                .get(&(a.source.clone(), a.name.clone()))
                .ok_or_else(|| Error::InvalidInstance(format!("missing attribute function `{}`", a.name)))?;
            let dom = &self.rows[&a.source];
            if f.len() != dom.len() || !f.keys().all(|r| dom.contains(r)) {
                return Err(Error::InvalidInstance(format!(
                    "attribute `{}.{}` is not total on the rows of `{}`",
                    a.source, a.name, a.source
                )));
            }
            for (x, v) in f {
                if !v.fits(a.ty) {
                    return Err(Error::InvalidInstance(format!(
                        "attribute `{}.{}` of row {x} holds {v}, expected {}",
                        a.source, a.name, a.ty
                    )));
                }
            }
        }
        for eq in s.equations() {
            for r in self.rows(&eq.lhs.source) {
                if self.eval_path(&eq.lhs, r)? != self.eval_path(&eq.rhs, r)? {
                    return Err(Error::EquationViolated {
                        equation: eq.to_string(),
                        node: eq.lhs.source.clone(),
                        row: r.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The distinct values of attribute `attr` on `node`.
    pub fn attribute_values(&self, node: &str, attr: &str) -> BTreeSet<Value> {
        self.attrs
            .get(&(node.to_owned(), attr.to_owned()))
            .map(|f| f.values().cloned().collect())
            .unwrap_or_default()
    }

    /// Smallest id not yet used on `node`.
    pub fn fresh_row(&self, node: &str) -> RowId {
        RowId(self.rows.get(node).and_then(|r| r.last()).map_or(0, |r| r.0 + 1))
    }
}

/// Mutable construction of an [`Instance`]; [`build`](Self::build) validates.
#[derive(Clone, Debug)]
pub struct InstanceBuilder {
    inst: Instance,
}

impl InstanceBuilder {
    pub fn schema(&self) -> &Arc<Schema> {
        &self.inst.schema
    }

    pub fn add_row(&mut self, node: &str, row: RowId) -> Result<bool> {
        self.inst
            .rows
            .get_mut(node)
            .map(|r| r.insert(row))
            .ok_or_else(|| Error::UnknownNode(node.to_owned()))
    }

    pub fn set_edge(&mut self, node: &str, edge: &str, from: RowId, to: RowId) -> Result<()> {
        let f = self
            .inst
            .edges
            .get_mut(&(node.to_owned(), edge.to_owned()))
            .ok_or_else(|| Error::UnknownStep { node: node.to_owned(), name: edge.to_owned() })?;
        f.insert(from, to);
        Ok(())
    }

    pub fn set_attr(&mut self, node: &str, attr: &str, row: RowId, value: Value) -> Result<()> {
        let f = self
            .inst
            .attrs
            .get_mut(&(node.to_owned(), attr.to_owned()))
            .ok_or_else(|| Error::UnknownStep { node: node.to_owned(), name: attr.to_owned() })?;
        f.insert(row, value);
        Ok(())
    }

    pub fn has_row(&self, node: &str, row: RowId) -> bool {
        self.inst.has_row(node, row)
    }

    pub fn build(self) -> Result<Instance> {
        self.inst.validate()?;
        Ok(self.inst)
    }

    /// Returns the instance without validation; operations whose outputs are
    /// valid by construction use this, tests re-validate.
    pub(crate) fn finish(self) -> Instance {
        self.inst
    }
}

impl From<Instance> for InstanceBuilder {
    fn from(inst: Instance) -> Self {
        InstanceBuilder { inst }
    }
}
