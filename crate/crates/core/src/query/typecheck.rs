use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::ast::{Operand, PathExpr, Query};
use crate::error::{Error, Result};
use crate::kernel::{BaseType, Path, Schema, Sort};
use crate::value::Value;

/// Node of the single-node schema every query result lives on.
pub const RESULT_NODE: &str = "row";

/// A path expression resolved against a binding's node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundPath {
    pub var: usize,
    pub path: Path,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cond {
    /// Two row-valued paths landing on the same node.
    Rows(BoundPath, BoundPath),
    Const(BoundPath, Value),
    Attrs(BoundPath, BoundPath),
}

impl Cond {
    pub(crate) fn vars(&self) -> Vec<usize> {
        match self {
            Cond::Rows(a, b) | Cond::Attrs(a, b) => vec![a.var, b.var],
            Cond::Const(a, _) => vec![a.var],
        }
    }
}

#[derive(Clone, Debug)]
pub struct SelectColumn {
    pub alias: String,
    pub path: BoundPath,
    pub ty: BaseType,
}

/// A query whose names have all been resolved against a schema.
#[derive(Clone, Debug)]
pub struct TypedQuery {
    /// `(variable, node)` in `from` order.
    pub vars: Vec<(String, String)>,
    pub select: Vec<SelectColumn>,
    pub groups: Vec<Vec<Cond>>,
    pub result: Arc<Schema>,
}

fn query_err<T>(msg: String) -> Result<T> {
    Err(Error::Query(msg))
}

fn resolve(schema: &Schema, vars: &BTreeMap<&str, usize>, nodes: &[(String, String)], e: &PathExpr) -> Result<(BoundPath, Sort)> {
    let Some(&var) = vars.get(e.var.as_str()) else {
        return Err(Error::UnknownName(e.var.clone()));
    };
    let path = schema.resolve_path(&nodes[var].1, &e.steps)?;
    let sort = schema.target(&path)?;
    Ok((BoundPath { var, path }, sort))
}

pub fn typecheck_query(q: &Query, schema: &Schema) -> Result<TypedQuery> {
    let mut vars = BTreeMap::new();
    let mut nodes = Vec::new();
    for b in &q.from {
        if !schema.has_node(&b.node) {
            return Err(Error::UnknownNode(b.node.clone()));
        }
        if vars.insert(b.var.as_str(), nodes.len()).is_some() {
            return query_err(format!("variable `{}` is bound twice", b.var));
        }
        nodes.push((b.var.clone(), b.node.clone()));
    }
    if nodes.is_empty() {
        return query_err("query has no bindings".into());
    }

    let mut aliases = BTreeSet::new();
    let mut select = Vec::new();
    let mut result = Schema::builder("result").node(RESULT_NODE);
    for item in &q.select {
        if !aliases.insert(item.alias.as_str()) {
            return query_err(format!("alias `{}` is used twice", item.alias));
        }
        let (path, sort) = resolve(schema, &vars, &nodes, &item.expr)?;
        let Sort::Value(ty) = sort else {
            return query_err(format!("select item `{}` is row-valued; select an attribute", item.expr));
        };
        result = result.attribute(item.alias.clone(), RESULT_NODE, ty);
        select.push(SelectColumn { alias: item.alias.clone(), path, ty });
    }

    let mut groups = Vec::new();
    for group in &q.conditions {
        let mut alts = Vec::new();
        for eq in group {
            let cond = match (&eq.lhs, &eq.rhs) {
                (Operand::Lit(_), Operand::Lit(_)) => {
                    return query_err(format!("`{eq}` compares two constants"));
                }
                (Operand::Path(p), Operand::Lit(v)) | (Operand::Lit(v), Operand::Path(p)) => {
                    let (bp, sort) = resolve(schema, &vars, &nodes, p)?;
                    match sort {
                        Sort::Value(ty) if v.fits(ty) => Cond::Const(bp, v.clone()),
                        Sort::Value(ty) => return query_err(format!("`{eq}`: `{p}` has type {ty}, the constant does not")),
                        Sort::Node(n) => return query_err(format!("`{eq}`: `{p}` is a row of `{n}`, not a value")),
                    }
                }
                (Operand::Path(a), Operand::Path(b)) => {
                    let (pa, sa) = resolve(schema, &vars, &nodes, a)?;
                    let (pb, sb) = resolve(schema, &vars, &nodes, b)?;
                    match (sa, sb) {
                        (Sort::Node(x), Sort::Node(y)) if x == y => Cond::Rows(pa, pb),
                        (Sort::Value(x), Sort::Value(y)) if x == y => Cond::Attrs(pa, pb),
                        (Sort::Node(x), Sort::Node(y)) => {
                            return query_err(format!("`{eq}` equates rows of different nodes `{x}` and `{y}`"))
                        }
                        (x, y) => return query_err(format!("`{eq}` compares {x} with {y}")),
                    }
                }
            };
            alts.push(cond);
        }
        groups.push(alts);
    }

    Ok(TypedQuery { vars: nodes, select, groups, result: Arc::new(result.build()?) })
}
