//! Left Kan extension by a chase over a term model.
//!
//! Generators are triples `(s, x, p)` with `x` a row of `I(s)` and `p` a
//! morphism `F(s) -> t` in normal form; they stand for "`x` pushed to `F(s)`
//! and then moved along `p`". Two generators are identified when an edge of
//! the source instance forces it: `(s, x, F(e);p) ~ (s', e(x), p)`. Because
//! generators are closed under post-composition, this relation is already a
//! congruence for the target's edge actions. Attribute slots of the resulting
//! classes are then unified by the target's attribute equations and seeded by
//! the source attribute values; a slot nobody constrains becomes a labelled
//! null.

use std::collections::{BTreeMap, HashMap};

use super::expect_schema;
use super::unionfind::UnionFind;
use crate::error::{Error, Result};
use crate::instance::{Instance, InstanceBuilder, RowId};
use crate::kernel::{AttrImage, Mapping, Path};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Gen {
    node: String,
    row: RowId,
    path: Path,
}

pub fn sigma(f: &Mapping, i: &Instance, bound: usize) -> Result<Instance> {
    expect_schema(f.source(), i)?;
    let (s, t) = (f.source().clone(), f.target().clone());

    // hom-sets F(s) -> u for every target node u
    let mut homs: BTreeMap<String, BTreeMap<String, Vec<Path>>> = BTreeMap::new();
    for node in s.nodes() {
        let img = f.node_image(node)?;
        if homs.contains_key(img) || i.row_count(node) == 0 {
            continue;
        }
        let expl = t.explore(img, bound)?;
        let mut per_target = BTreeMap::new();
        for u in t.nodes() {
            per_target.insert(u.to_owned(), expl.hom(u, bound)?);
        }
        homs.insert(img.to_owned(), per_target);
    }

    let mut gens: Vec<Gen> = Vec::new();
    let mut index: HashMap<Gen, usize> = HashMap::new();
    for node in s.nodes() {
        let Some(per_target) = homs.get(f.node_image(node)?) else { continue };
        for row in i.rows(node) {
            for paths in per_target.values() {
                for p in paths {
                    let g = Gen { node: node.to_owned(), row, path: p.clone() };
                    index.insert(g.clone(), gens.len());
                    gens.push(g);
                }
            }
        }
    }
    let lookup = |g: &Gen| -> Result<usize> {
        index
            .get(g)
            .copied()
            .ok_or_else(|| Error::Internal(format!("sigma: missing generator {g:?}")))
    };

    let mut uf = UnionFind::new(gens.len());
    for e in s.edges() {
        let fe = f.edge_image(&e.source, &e.name)?;
        let Some(per_target) = homs.get(f.node_image(&e.target)?) else { continue };
        for x in i.rows(&e.source) {
            let y = i.edge_fn(&e.source, &e.name)[&x];
            for paths in per_target.values() {
                for p in paths {
                    let lhs = Gen { node: e.source.clone(), row: x, path: t.normalize_path(&t.compose(fe, p)?, bound)? };
                    let rhs = Gen { node: e.target.clone(), row: y, path: p.clone() };
                    uf.union(lookup(&lhs)?, lookup(&rhs)?);
                }
            }
        }
    }

    // classes per target node, numbered by their least generator
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for g in 0..gens.len() {
        members.entry(uf.find(g)).or_default().push(g);
    }
    let mut canonical: Vec<(String, Gen, usize)> = members
        .iter()
        .map(|(root, ms)| {
            let least = ms.iter().map(|&m| &gens[m]).min().expect("nonempty class").clone();
            (t.target_node(&least.path), least, *root)
        })
        .map(|(node, least, root)| node.map(|n| (n, least, root)))
        .collect::<Result<_>>()?;
    canonical.sort();
    let mut row_of_root: HashMap<usize, (String, RowId)> = HashMap::new();
    let mut counters: BTreeMap<String, u64> = BTreeMap::new();
    let mut least_of: BTreeMap<(String, RowId), Gen> = BTreeMap::new();
    for (node, least, root) in &canonical {
        let c = counters.entry(node.clone()).or_insert(0);
        row_of_root.insert(*root, (node.clone(), RowId(*c)));
        least_of.insert((node.clone(), RowId(*c)), least.clone());
        *c += 1;
    }

    let mut b = InstanceBuilder::from(Instance::empty(t.clone()));
    for (node, row) in least_of.keys() {
        b.add_row(node, *row)?;
    }
    // class of generator `g` moved along a target path starting at its node
    let mut move_along = |g: &Gen, steps: &Path| -> Result<(String, RowId)> {
        let p = t.normalize_path(&t.compose(&g.path, steps)?, bound)?;
        let moved = lookup(&Gen { node: g.node.clone(), row: g.row, path: p })?;
        Ok(row_of_root[&uf.find(moved)].clone())
    };
    for ((node, row), least) in &least_of {
        for e in t.edges_from(node) {
            let (_, target) = move_along(least, &Path::edges(node.clone(), [e.name.clone()]))?;
            b.set_edge(node, &e.name, *row, target)?;
        }
    }

    // attribute slots: one per (class, attribute)
    let mut slots: Vec<(String, RowId, String)> = Vec::new();
    let mut slot_index: HashMap<(String, RowId, String), usize> = HashMap::new();
    for (node, row) in least_of.keys() {
        for a in t.attributes_of(node) {
            let key = (node.clone(), *row, a.name.clone());
            slot_index.insert(key.clone(), slots.len());
            slots.push(key);
        }
    }
    let mut slot_uf = UnionFind::new(slots.len());
    let mut fixed: HashMap<usize, Value> = HashMap::new();

    let pin = |slot_uf: &mut UnionFind, fixed: &mut HashMap<usize, Value>, slot: usize, v: Value| -> Result<()> {
        let root = slot_uf.find(slot);
        match fixed.get(&root) {
            Some(old) if *old != v => Err(Error::AttributeClash { first: old.to_string(), second: v.to_string() }),
            Some(_) => Ok(()),
            None => {
                fixed.insert(root, v);
                Ok(())
            }
        }
    };

    for a in s.attributes() {
        let img = f.attribute_image(&a.source, &a.name)?;
        for x in i.rows(&a.source) {
            let v = i.attr_fn(&a.source, &a.name)[&x].clone();
            match img {
                AttrImage::Const(c) => {
                    if !v.is_null() && v != *c {
                        return Err(Error::AttributeClash { first: c.to_string(), second: v.to_string() });
                    }
                }
                AttrImage::Path(p) => {
                    let prefix = Path { source: p.source.clone(), steps: p.steps.clone(), terminal: None };
                    let start = Gen { node: a.source.clone(), row: x, path: Path::id(p.source.clone()) };
                    let (node, row) = move_along(&start, &prefix)?;
                    let attr = p.terminal.clone().expect("attribute image ends in an attribute");
                    let slot = slot_index[&(node, row, attr)];
                    pin(&mut slot_uf, &mut fixed, slot, v)?;
                }
            }
        }
    }

    for eq in t.equations().iter().filter(|eq| eq.lhs.terminal.is_some()) {
        let rows: Vec<RowId> = least_of.keys().filter(|(n, _)| *n == eq.lhs.source).map(|(_, r)| *r).collect();
        for row in rows {
            let least = least_of[&(eq.lhs.source.clone(), row)].clone();
            let mut ends = Vec::new();
            for side in [&eq.lhs, &eq.rhs] {
                let prefix = Path { source: side.source.clone(), steps: side.steps.clone(), terminal: None };
                let (node, r) = move_along(&least, &prefix)?;
                ends.push(slot_index[&(node, r, side.terminal.clone().expect("attribute equation"))]);
            }
            let (ra, rb) = (slot_uf.find(ends[0]), slot_uf.find(ends[1]));
            if let Some((keep, gone)) = slot_uf.union(ra, rb) {
                if let Some(v) = fixed.remove(&gone) {
                    let _ = keep;
                    pin(&mut slot_uf, &mut fixed, keep, v)?;
                }
            }
        }
    }

    for (k, (node, row, attr)) in slots.iter().enumerate() {
        let root = slot_uf.find(k);
        let v = match fixed.get(&root) {
            Some(v) => v.clone(),
            None => {
                let (cn, cr, ca) = &slots[root];
                let g = &least_of[&(cn.clone(), *cr)];
                Value::Null(format!("{cn}.{ca}@{}:{}:{}", g.node, g.row, g.path))
            }
        };
        b.set_attr(node, attr, *row, v)?;
    }
    Ok(b.finish())
}
