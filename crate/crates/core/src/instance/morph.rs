//! Homomorphism search: isomorphism testing and hom counting by backtracking
//! with propagation along edges.

use std::collections::{HashMap, HashSet};

use super::ops::refine;
use super::{Instance, RowId};
use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::value::Value;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Bijective, attributes (including null labels) preserved exactly.
    Iso,
    /// Any natural transformation; a labelled null in the source stands for an
    /// unknown value and may map to any value, consistently per label.
    Hom,
}

struct Search<'a> {
    src: &'a Instance,
    dst: &'a Instance,
    mode: Mode,
    vars: Vec<(String, RowId)>,
    /// For each variable: (target variable, edge name) per outgoing edge.
    out: Vec<Vec<(usize, String)>>,
    candidates: Vec<Vec<RowId>>,
    order: Vec<usize>,
}

#[derive(Clone, Default)]
struct State {
    assign: Vec<Option<RowId>>,
    used: HashSet<(String, RowId)>,
    nulls: HashMap<String, Value>,
}

impl<'a> Search<'a> {
    fn new(src: &'a Instance, dst: &'a Instance, mode: Mode, candidates: impl Fn(&str, RowId) -> Vec<RowId>) -> Self {
        let schema = src.schema();
        let vars: Vec<(String, RowId)> = src
            .rows
            .iter()
            .flat_map(|(n, rows)| rows.iter().map(move |r| (n.clone(), *r)))
            .collect();
        let index: HashMap<&(String, RowId), usize> = vars.iter().zip(0..).collect();
        let out = vars
            .iter()
            .map(|(n, r)| {
                schema
                    .edges_from(n)
                    .map(|e| (index[&(e.target.clone(), src.edge_fn(n, &e.name)[r])], e.name.clone()))
                    .collect()
            })
            .collect();
        let candidates: Vec<Vec<RowId>> = vars.iter().map(|(n, r)| candidates(n, *r)).collect();
        let mut order: Vec<usize> = (0..vars.len()).collect();
        order.sort_by_key(|&v| candidates[v].len());
        Search { src, dst, mode, vars, out, candidates, order }
    }

    fn attributes_fit(&self, var: usize, y: RowId, state: &mut State) -> bool {
        let (node, x) = &self.vars[var];
        for a in self.src.schema().attributes_of(node) {
            let sv = &self.src.attr_fn(node, &a.name)[x];
            let dv = &self.dst.attr_fn(node, &a.name)[&y];
            match (self.mode, sv) {
                (Mode::Hom, Value::Null(label)) => match state.nulls.get(label) {
                    Some(bound) if bound != dv => return false,
                    Some(_) => {}
                    None => {
                        state.nulls.insert(label.clone(), dv.clone());
                    }
                },
                _ if sv != dv => return false,
                _ => {}
            }
        }
        true
    }

    /// Assigns `var := y` and everything it forces along edges.
    fn assign(&self, var: usize, y: RowId, state: &mut State) -> bool {
        let mut work = vec![(var, y)];
        while let Some((v, y)) = work.pop() {
            if let Some(z) = state.assign[v] {
                if z != y {
                    return false;
                }
                continue;
            }
            let node = &self.vars[v].0;
            if self.mode == Mode::Iso {
                if !self.candidates[v].contains(&y) || !state.used.insert((node.clone(), y)) {
                    return false;
                }
            }
            if !self.attributes_fit(v, y, state) {
                return false;
            }
            state.assign[v] = Some(y);
            for (t, edge) in &self.out[v] {
                work.push((*t, self.dst.edge_fn(node, edge)[&y]));
            }
        }
        true
    }

    /// Counts complete assignments, stopping early once `stop_after` is exceeded.
    fn count(&self, state: State, stop_after: usize) -> usize {
        let Some(&v) = self.order.iter().find(|&&v| state.assign[v].is_none()) else {
            return 1;
        };
        let mut total = 0;
        for &y in &self.candidates[v] {
            let mut next = state.clone();
            if self.assign(v, y, &mut next) {
                total += self.count(next, stop_after - total.min(stop_after));
                if total > stop_after {
                    break;
                }
            }
        }
        total
    }

    fn start(&self) -> State {
        State { assign: vec![None; self.vars.len()], ..State::default() }
    }
}

/// Whether a bijective homomorphism `i -> j` exists.
pub fn iso_check(i: &Instance, j: &Instance) -> bool {
    if i.schema() != j.schema() {
        return false;
    }
    if i.schema().nodes().any(|n| i.row_count(n) != j.row_count(n)) {
        return false;
    }
    let colors = refine(&[i, j], Strategy::Sequential);
    let mut histogram: HashMap<u32, i64> = HashMap::new();
    for c in colors[0].values().flat_map(HashMap::values) {
        *histogram.entry(*c).or_default() += 1;
    }
    for c in colors[1].values().flat_map(HashMap::values) {
        *histogram.entry(*c).or_default() -= 1;
    }
    if histogram.values().any(|&d| d != 0) {
        return false;
    }
    let mut by_color: HashMap<(String, u32), Vec<RowId>> = HashMap::new();
    for (n, rows) in &colors[1] {
        for (r, c) in rows {
            by_color.entry((n.clone(), *c)).or_default().push(*r);
        }
    }
    for v in by_color.values_mut() {
        v.sort();
    }
    let search = Search::new(i, j, Mode::Iso, |n, r| {
        by_color.get(&(n.to_owned(), colors[0][n][&r])).cloned().unwrap_or_default()
    });
    search.count(search.start(), 0) > 0
}

/// Number of natural transformations `i -> j` (source labelled nulls act as
/// unknowns); errors once the count exceeds `limit`.
pub fn enumerate_homs(i: &Instance, j: &Instance, limit: usize) -> Result<usize> {
    if i.schema() != j.schema() {
        return Err(Error::SchemaMismatch {
            expected: i.schema().name().to_owned(),
            found: j.schema().name().to_owned(),
        });
    }
    let search = Search::new(i, j, Mode::Hom, |n, _| j.rows(n).collect());
    let n = search.count(search.start(), limit);
    if n > limit {
        return Err(Error::HomLimitExceeded(limit));
    }
    Ok(n)
}
