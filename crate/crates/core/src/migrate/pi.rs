//! Right Kan extension as limits over comma categories.
//!
//! A row of `pi_F(I)(t)` is a family choosing a row `x(s, q)` of `I(s)` for
//! every comma object `(s, q : t -> F(s))`, compatible with the source edges:
//! `I(e)(x(s, q)) = x(s', q;F(e))`. Source attributes land in groups keyed by
//! the target attribute path (or constant) they translate to; every member of
//! a group must agree, and a target attribute reads its group.
//!
//! Families are enumerated as a filtered product, with each choice propagated
//! along edges immediately so forced entries are never branched on.

use std::collections::{BTreeMap, HashMap};

use super::expect_schema;
use crate::error::{Error, Result};
use crate::exec::{self, Strategy};
use crate::instance::{Instance, InstanceBuilder, RowId};
use crate::kernel::{AttrImage, Mapping, Path, Schema};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum GroupKey {
    Path(Path),
    Const(Value),
}

/// Comma category `(t | F)` with edge constraints and attribute groups.
struct Comma {
    objects: Vec<(String, Path)>,
    index: HashMap<(String, Path), usize>,
    /// per object: (source edge, target object)
    edges: Vec<Vec<(String, usize)>>,
    /// per object: (source attribute, group)
    attrs: Vec<Vec<(String, usize)>>,
    groups: Vec<GroupKey>,
    group_index: HashMap<GroupKey, usize>,
    order: Vec<usize>,
}

impl Comma {
    fn build(f: &Mapping, t: &Schema, node: &str, bound: usize) -> Result<Comma> {
        let s = f.source();
        let expl = t.explore(node, bound)?;
        let mut objects = Vec::new();
        let mut index = HashMap::new();
        for sn in s.nodes() {
            for q in expl.hom(f.node_image(sn)?, bound)? {
                index.insert((sn.to_owned(), q.clone()), objects.len());
                objects.push((sn.to_owned(), q));
            }
        }
        let mut edges = Vec::with_capacity(objects.len());
        let mut attrs = Vec::with_capacity(objects.len());
        let mut groups = Vec::new();
        let mut group_index: HashMap<GroupKey, usize> = HashMap::new();
        for (sn, q) in &objects {
            let mut es = Vec::new();
            for e in s.edges_from(sn) {
                let moved = t.normalize_path(&t.compose(q, f.edge_image(sn, &e.name)?)?, bound)?;
                let target = index
                    .get(&(e.target.clone(), moved))
                    .copied()
                    .ok_or_else(|| Error::Internal("pi: comma category not closed under edges".into()))?;
                es.push((e.name.clone(), target));
            }
            edges.push(es);
            let mut ats = Vec::new();
            for a in s.attributes_of(sn) {
                let key = match f.attribute_image(sn, &a.name)? {
                    AttrImage::Const(v) => GroupKey::Const(v.clone()),
                    AttrImage::Path(p) => GroupKey::Path(t.normalize_path(&t.compose(q, p)?, bound)?),
                };
                let next = groups.len();
                let g = *group_index.entry(key.clone()).or_insert_with(|| {
                    groups.push(key);
                    next
                });
                ats.push((a.name.clone(), g));
            }
            attrs.push(ats);
        }
        let mut order: Vec<usize> = (0..objects.len()).collect();
        order.sort_by(|&a, &b| objects[a].1.length_lex_cmp(&objects[b].1).then(a.cmp(&b)));
        Ok(Comma { objects, index, edges, attrs, groups, group_index, order })
    }
}

#[derive(Clone)]
struct Partial {
    rows: Vec<Option<RowId>>,
    values: Vec<Option<Value>>,
}

struct Enumerator<'a> {
    comma: &'a Comma,
    inst: &'a Instance,
}

impl Enumerator<'_> {
    fn start(&self) -> Partial {
        Partial {
            rows: vec![None; self.comma.objects.len()],
            values: self
                .comma
                .groups
                .iter()
                .map(|g| match g {
                    GroupKey::Const(v) => Some(v.clone()),
                    GroupKey::Path(_) => None,
                })
                .collect(),
        }
    }

    fn assign(&self, obj: usize, x: RowId, st: &mut Partial) -> bool {
        let mut work = vec![(obj, x)];
        while let Some((o, x)) = work.pop() {
            if let Some(y) = st.rows[o] {
                if y != x {
                    return false;
                }
                continue;
            }
            let sn = &self.comma.objects[o].0;
            for (a, g) in &self.comma.attrs[o] {
                let v = &self.inst.attr_fn(sn, a)[&x];
                match &st.values[*g] {
                    Some(w) if w != v => return false,
                    Some(_) => {}
                    None => st.values[*g] = Some(v.clone()),
                }
            }
            st.rows[o] = Some(x);
            for (e, target) in &self.comma.edges[o] {
                work.push((*target, self.inst.edge_fn(sn, e)[&x]));
            }
        }
        true
    }

    fn complete(&self, st: Partial, out: &mut Vec<Partial>) {
        let Some(&o) = self.comma.order.iter().find(|&&o| st.rows[o].is_none()) else {
            out.push(st);
            return;
        };
        for x in self.inst.rows(&self.comma.objects[o].0) {
            let mut next = st.clone();
            if self.assign(o, x, &mut next) {
                self.complete(next, out);
            }
        }
    }

    fn families(&self, strategy: Strategy) -> Vec<Partial> {
        let st = self.start();
        let Some(&first) = self.comma.order.first() else {
            return vec![st];
        };
        let choices: Vec<RowId> = self.inst.rows(&self.comma.objects[first].0).collect();
        exec::flat_map(strategy, &choices, |&x| {
            let mut next = st.clone();
            let mut out = Vec::new();
            if self.assign(first, x, &mut next) {
                self.complete(next, &mut out);
            }
            out
        })
    }
}

pub fn pi(f: &Mapping, i: &Instance, bound: usize) -> Result<Instance> {
    pi_with(f, i, bound, Strategy::default())
}

pub fn pi_with(f: &Mapping, i: &Instance, bound: usize, strategy: Strategy) -> Result<Instance> {
    expect_schema(f.source(), i)?;
    let t = f.target().clone();
    let mut commas: BTreeMap<String, Comma> = BTreeMap::new();
    for node in t.nodes() {
        commas.insert(node.to_owned(), Comma::build(f, &t, node, bound)?);
    }

    let mut families: BTreeMap<String, Vec<Partial>> = BTreeMap::new();
    let mut lookup: BTreeMap<String, HashMap<Vec<RowId>, RowId>> = BTreeMap::new();
    for (node, comma) in &commas {
        let mut fams = Enumerator { comma, inst: i }.families(strategy);
        fams.sort_by(|a, b| a.rows.cmp(&b.rows));
        let mut by_rows = HashMap::new();
        for (k, fam) in fams.iter().enumerate() {
            let key = fam.rows.iter().map(|r| r.expect("complete family")).collect();
            by_rows.insert(key, RowId(k as u64));
        }
        lookup.insert(node.clone(), by_rows);
        families.insert(node.clone(), fams);
    }

    let mut b = InstanceBuilder::from(Instance::empty(t.clone()));
    for (node, fams) in &families {
        for k in 0..fams.len() {
            b.add_row(node, RowId(k as u64))?;
        }
    }
    for e in t.edges() {
        let (from, to) = (&commas[&e.source], &commas[&e.target]);
        // object (s, q') of the target node reads object (s, e;q') of the source
        let reindex: Vec<usize> = to
            .objects
            .iter()
            .map(|(sn, q)| {
                let moved = t.normalize_path(&t.compose(&Path::edges(e.source.clone(), [e.name.clone()]), q)?, bound)?;
                from.index
                    .get(&(sn.clone(), moved))
                    .copied()
                    .ok_or_else(|| Error::Internal("pi: precomposition left the comma category".into()))
            })
            .collect::<Result<_>>()?;
        for (k, fam) in families[&e.source].iter().enumerate() {
            let image: Vec<RowId> = reindex.iter().map(|&o| fam.rows[o].expect("complete family")).collect();
            let target = lookup[&e.target]
                .get(&image)
                .copied()
                .ok_or_else(|| Error::Internal(format!("pi: image family missing at `{}`", e.target)))?;
            b.set_edge(&e.source, &e.name, RowId(k as u64), target)?;
        }
    }
    for a in t.attributes() {
        let comma = &commas[&a.source];
        let key = GroupKey::Path(t.normalize_path(&Path::id(a.source.clone()).with_terminal(a.name.clone()), bound)?);
        let g = comma
            .group_index
            .get(&key)
            .copied()
            .ok_or_else(|| Error::UndeterminedAttribute { node: a.source.clone(), attribute: a.name.clone() })?;
        for (k, fam) in families[&a.source].iter().enumerate() {
            let v = fam.values[g].clone().ok_or_else(|| Error::Internal("pi: unfilled attribute group".into()))?;
            b.set_attr(&a.source, &a.name, RowId(k as u64), v)?;
        }
    }
    Ok(b.finish())
}
