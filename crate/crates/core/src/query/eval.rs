use std::collections::HashMap;

use super::ast::Query;
use super::typecheck::{typecheck_query, BoundPath, Cond, TypedQuery, RESULT_NODE};
use crate::error::Result;
use crate::exec::{self, Strategy};
use crate::instance::{Datum, Instance, RowId};
use crate::kernel::Path;
use crate::value::Value;

/// Column reference: (variable, index into that variable's evaluated paths).
type Col = (usize, usize);

enum Check {
    Eq(Col, Col),
    Const(Col, Value),
}

struct Plan {
    order: Vec<usize>,
    /// Per variable: candidate rows and, per candidate, the evaluated columns.
    data: Vec<Vec<Vec<Datum>>>,
    rows: Vec<Vec<RowId>>,
    /// Groups (disjunctions) checked once the last of their variables is bound.
    checks: Vec<Vec<Vec<Check>>>,
    /// Optional hash index for each level > 0: (column of this var, column of
    /// an earlier var, key -> candidate positions).
    index: Vec<Option<(Col, HashMap<Datum, Vec<usize>>)>>,
    select: Vec<Col>,
}

fn col_of(cols: &mut [Vec<Path>], bp: &BoundPath) -> Col {
    let list = &mut cols[bp.var];
    let i = match list.iter().position(|p| *p == bp.path) {
        Some(i) => i,
        None => {
            list.push(bp.path.clone());
            list.len() - 1
        }
    };
    (bp.var, i)
}

fn holds(c: &Check, data: &[Vec<Vec<Datum>>], at: &[usize]) -> bool {
    let get = |(v, i): Col| &data[v][at[v]][i];
    match c {
        Check::Eq(a, b) => get(*a) == get(*b),
        Check::Const(a, v) => matches!(get(*a), Datum::Value(x) if x == v),
    }
}

fn plan(t: &TypedQuery, inst: &Instance) -> Result<Plan> {
    let nv = t.vars.len();
    let mut order: Vec<usize> = (0..nv).collect();
    order.sort_by_key(|&v| (inst.row_count(&t.vars[v].1), v));
    let mut level = vec![0; nv];
    for (k, &v) in order.iter().enumerate() {
        level[v] = k;
    }

    let mut cols: Vec<Vec<Path>> = vec![Vec::new(); nv];
    let select: Vec<Col> = t.select.iter().map(|s| col_of(&mut cols, &s.path)).collect();
    let mut groups = Vec::new();
    for g in &t.groups {
        let checks: Vec<Check> = g
            .iter()
            .map(|c| match c {
                Cond::Rows(a, b) | Cond::Attrs(a, b) => Check::Eq(col_of(&mut cols, a), col_of(&mut cols, b)),
                Cond::Const(a, v) => Check::Const(col_of(&mut cols, a), v.clone()),
            })
            .collect();
        let lvl = g.iter().flat_map(Cond::vars).map(|v| level[v]).max().unwrap_or(0);
        let single_var = g.iter().flat_map(Cond::vars).all(|v| v == order[lvl]);
        groups.push((lvl, single_var, checks));
    }

    // Evaluate every needed path on every row, dropping rows that fail a
    // group mentioning only their own variable.
    let mut data = vec![Vec::new(); nv];
    let mut rows = vec![Vec::new(); nv];
    for v in 0..nv {
        let node = &t.vars[v].1;
        let local: Vec<&Vec<Check>> = groups
            .iter()
            .filter(|(l, single, _)| *single && order[*l] == v)
            .map(|(_, _, c)| c)
            .collect();
        for row in inst.rows(node) {
            let vals = cols[v].iter().map(|p| inst.eval_path(p, row)).collect::<Result<Vec<_>>>()?;
            data[v].push(vals);
            let mut at = vec![0; nv];
            at[v] = data[v].len() - 1;
            if local.iter().all(|g| g.iter().any(|c| holds(c, &data, &at))) {
                rows[v].push(row);
            } else {
                data[v].pop();
            }
        }
    }

    let mut checks: Vec<Vec<Vec<Check>>> = (0..nv).map(|_| Vec::new()).collect();
    for (lvl, single, g) in groups {
        if !single {
            checks[lvl].push(g);
        }
    }

    let mut index = Vec::with_capacity(nv);
    for (k, &v) in order.iter().enumerate() {
        let join = checks[k].iter().find_map(|g| match g.as_slice() {
            [Check::Eq(a, b)] if a.0 == v && level[b.0] < k => Some((*a, *b)),
            [Check::Eq(a, b)] if b.0 == v && level[a.0] < k => Some((*b, *a)),
            _ => None,
        });
        index.push(join.filter(|_| k > 0).map(|(mine, other)| {
            let mut map: HashMap<Datum, Vec<usize>> = HashMap::new();
            for (pos, vals) in data[v].iter().enumerate() {
                map.entry(vals[mine.1].clone()).or_default().push(pos);
            }
            (other, map)
        }));
    }

    Ok(Plan { order, data, rows, checks, index, select })
}

impl Plan {
    fn extend(&self, k: usize, at: &mut Vec<usize>, out: &mut Vec<Vec<Value>>) {
        if k == self.order.len() {
            out.push(
                self.select
                    .iter()
                    .map(|&(v, i)| match &self.data[v][at[v]][i] {
                        Datum::Value(x) => x.clone(),
                        Datum::Row(_) => unreachable!("select columns are attribute-valued"),
                    })
                    .collect(),
            );
            return;
        }
        let v = self.order[k];
        let visit = |pos: usize, at: &mut Vec<usize>, out: &mut Vec<Vec<Value>>| {
            at[v] = pos;
            if self.checks[k].iter().all(|g| g.iter().any(|c| holds(c, &self.data, at))) {
                self.extend(k + 1, at, out);
            }
        };
        match &self.index[k] {
            Some(((ov, oi), map)) => {
                if let Some(hits) = map.get(&self.data[*ov][at[*ov]][*oi]) {
                    for &pos in hits {
                        visit(pos, at, out);
                    }
                }
            }
            None => {
                for pos in 0..self.rows[v].len() {
                    visit(pos, at, out);
                }
            }
        }
    }
}

/// Evaluates a type-checked query by join enumeration. Bindings are visited
/// smallest table first; row and attribute equalities against an already
/// bound variable become hash lookups.
pub fn eval_typed(t: &TypedQuery, inst: &Instance, strategy: Strategy) -> Result<Instance> {
    let p = plan(t, inst)?;
    let first = p.order[0];
    let starts: Vec<usize> = (0..p.rows[first].len()).collect();
    let nv = p.order.len();
    let mut tuples = exec::flat_map(strategy, &starts, |&pos| {
        let mut at = vec![0; nv];
        let mut out = Vec::new();
        at[first] = pos;
        if p.checks[0].iter().all(|g| g.iter().any(|c| holds(c, &p.data, &at))) {
            p.extend(1, &mut at, &mut out);
        }
        out
    });
    tuples.sort();
    tuples.dedup();

    let mut b = Instance::builder(t.result.clone());
    for (k, tuple) in tuples.into_iter().enumerate() {
        let row = RowId(k as u64);
        b.add_row(RESULT_NODE, row)?;
        for (col, v) in t.select.iter().zip(tuple) {
            b.set_attr(RESULT_NODE, &col.alias, row, v)?;
        }
    }
    Ok(b.finish())
}

pub fn eval_query_direct(q: &Query, inst: &Instance) -> Result<Instance> {
    eval_query_with(q, inst, Strategy::default())
}

pub fn eval_query_with(q: &Query, inst: &Instance, strategy: Strategy) -> Result<Instance> {
    let t = typecheck_query(q, inst.schema())?;
    eval_typed(&t, inst, strategy)
}
