//! Translation of conjunctive select/from/where queries into a migration
//! `sigma(F_sigma, pi(F_pi, delta(F_delta, I)))`.
//!
//! The binding schema `B` has one node per `from` variable and, for every
//! row equality `p = q`, an apex node with two edges from the variables
//! involved. `F_delta : B -> S` sends each variable to its table and the two
//! edges to `p` and `q`, so a row of the apex is a row that both sides reach.
//! `F_pi : B -> R` collapses all of `B` onto the result node; the limit then
//! enumerates bindings agreeing on every apex, which is the join. Selected
//! attributes map to result attributes, constant comparisons map to the
//! constant itself. `F_sigma` is the identity on `R`.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::ast::Query;
use super::typecheck::{typecheck_query, BoundPath, Cond, TypedQuery, RESULT_NODE};
use crate::error::{Error, Result};
use crate::instance::{relationalize, union_all, Instance, RowId};
use crate::kernel::{Mapping, Path, Schema, Sort};
use crate::migrate::{delta, pi, sigma};
use crate::value::Value;

#[derive(Clone, Debug)]
pub struct Desugared {
    pub binding_schema: Arc<Schema>,
    pub result_schema: Arc<Schema>,
    pub f_delta: Mapping,
    pub f_pi: Mapping,
    pub f_sigma: Mapping,
}

impl Desugared {
    pub fn evaluate(&self, inst: &Instance, bound: usize) -> Result<Instance> {
        let d = delta(&self.f_delta, inst)?;
        let p = pi(&self.f_pi, &d, bound)?;
        let s = sigma(&self.f_sigma, &p, bound)?;
        Ok(relationalize(&s))
    }
}

fn fresh(prefix: &str, j: usize, taken: &BTreeSet<String>) -> String {
    let mut name = format!("{prefix}{j}");
    while taken.contains(&name) {
        name.insert(0, '_');
    }
    name
}

pub fn desugar_query(q: &Query, schema: &Arc<Schema>, bound: usize) -> Result<Desugared> {
    if q.conditions.iter().any(|g| g.len() > 1) {
        return Err(Error::NotDesugarable("query contains a disjunction".into()));
    }
    let t = typecheck_query(q, schema)?;
    desugar_typed(&t, schema, bound)
}

pub(crate) fn desugar_typed(t: &TypedQuery, schema: &Arc<Schema>, bound: usize) -> Result<Desugared> {
    let taken: BTreeSet<String> = t.vars.iter().map(|(v, _)| v.clone()).collect();
    let var = |bp: &BoundPath| t.vars[bp.var].0.clone();

    let mut b = Schema::builder("bindings");
    for (v, _) in &t.vars {
        b = b.node(v.clone());
    }
    let mut apexes = Vec::new();
    let mut consts = Vec::new();
    for g in &t.groups {
        match g.as_slice() {
            [Cond::Rows(l, r)] => {
                let apex = fresh("eq", apexes.len(), &taken);
                let node = schema.target_node(&l.path)?;
                let j = apexes.len();
                b = b
                    .node(apex.clone())
                    .edge(format!("l{j}"), var(l), apex.clone())
                    .edge(format!("r{j}"), var(r), apex.clone());
                apexes.push((apex, node, l, r));
            }
            [Cond::Const(p, v)] => {
                let Sort::Value(ty) = schema.target(&p.path)? else {
                    return Err(Error::Internal("constant compared with a row".into()));
                };
                let name = format!("c{}", consts.len());
                b = b.attribute(name.clone(), var(p), ty);
                consts.push((name, p, v));
            }
            [Cond::Attrs(..)] => {
                return Err(Error::NotDesugarable("attribute-to-attribute equality".into()));
            }
            _ => return Err(Error::NotDesugarable("query contains a disjunction".into())),
        }
    }
    for (k, col) in t.select.iter().enumerate() {
        b = b.attribute(format!("s{k}"), var(&col.path), col.ty);
    }
    let b = Arc::new(b.build()?);
    let r = t.result.clone();

    let mut fd = Mapping::builder("F_delta", b.clone(), schema.clone()).bound(bound);
    let mut fp = Mapping::builder("F_pi", b.clone(), r.clone()).bound(bound);
    for (v, node) in &t.vars {
        fd = fd.node(v, node);
        fp = fp.node(v, RESULT_NODE);
    }
    for (j, (apex, node, lhs, rhs)) in apexes.iter().enumerate() {
        fd = fd
            .node(apex, node)
            .edge(&var(lhs), &format!("l{j}"), lhs.path.clone())
            .edge(&var(rhs), &format!("r{j}"), rhs.path.clone());
        fp = fp
            .node(apex, RESULT_NODE)
            .edge(&var(lhs), &format!("l{j}"), Path::id(RESULT_NODE))
            .edge(&var(rhs), &format!("r{j}"), Path::id(RESULT_NODE));
    }
    for (name, p, v) in &consts {
        fd = fd.attribute_path(&var(p), name, p.path.clone());
        fp = fp.attribute_const(&var(p), name, (*v).clone());
    }
    for (k, col) in t.select.iter().enumerate() {
        let s = format!("s{k}");
        fd = fd.attribute_path(&var(&col.path), &s, col.path.path.clone());
        fp = fp.attribute_path(&var(&col.path), &s, Path::id(RESULT_NODE).with_terminal(col.alias.clone()));
    }
    Ok(Desugared {
        binding_schema: b,
        result_schema: r.clone(),
        f_delta: fd.build()?,
        f_pi: fp.build()?,
        f_sigma: Mapping::identity(r),
    })
}

/// Splits every disjunctive group, producing one conjunctive query per
/// combination of alternatives.
pub fn split_disjunctions(q: &Query) -> Vec<Query> {
    let mut out = vec![Query { select: q.select.clone(), from: q.from.clone(), conditions: Vec::new() }];
    for g in &q.conditions {
        out = out
            .into_iter()
            .flat_map(|base| {
                g.iter().map(move |alt| {
                    let mut next = base.clone();
                    next.conditions.push(vec![alt.clone()]);
                    next
                })
            })
            .collect();
    }
    out
}

/// Evaluates `q` by splitting disjunctions, desugaring each conjunctive
/// piece and unioning the results.
pub fn eval_desugared(q: &Query, inst: &Instance, bound: usize) -> Result<Instance> {
    let mut parts = Vec::new();
    for sub in split_disjunctions(q) {
        parts.push(desugar_query(&sub, inst.schema(), bound)?.evaluate(inst, bound)?);
    }
    Ok(in_value_order(&union_all(&parts)?))
}

/// Renumbers the rows of a query result in the order of their value tuples,
/// the numbering direct evaluation produces.
fn in_value_order(r: &Instance) -> Instance {
    let s = r.schema().clone();
    let attrs: Vec<String> = s.attributes_of(RESULT_NODE).map(|a| a.name.clone()).collect();
    let mut tuples: Vec<Vec<Value>> = r
        .rows(RESULT_NODE)
        .map(|x| attrs.iter().map(|a| r.attr(RESULT_NODE, a, x).cloned().expect("total")).collect())
        .collect();
    tuples.sort();
    let mut b = Instance::builder(s);
    for (k, t) in tuples.into_iter().enumerate() {
        let row = RowId(k as u64);
        b.add_row(RESULT_NODE, row).expect("result node");
        for (a, v) in attrs.iter().zip(t) {
            b.set_attr(RESULT_NODE, a, row, v).expect("result attribute");
        }
    }
    b.finish()
}
