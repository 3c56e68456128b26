use std::collections::{BTreeMap, HashMap};

use super::{Instance, RowId};
use crate::error::{Error, Result};
use crate::exec::{self, Strategy};
use crate::value::Value;

fn same_schema(i: &Instance, j: &Instance) -> Result<()> {
    if i.schema != j.schema {
        return Err(Error::SchemaMismatch {
            expected: i.schema.name().to_owned(),
            found: j.schema.name().to_owned(),
        });
    }
    Ok(())
}

/// Coproduct of two instances: tagged copies of both row sets, with the left
/// copy numbered first.
pub fn disjoint_union(i: &Instance, j: &Instance) -> Result<Instance> {
    disjoint_union_all(&[i, j])
}

/// Coproduct of any number of instances on one schema; the copies are
/// numbered consecutively in argument order.
pub fn disjoint_union_all(parts: &[&Instance]) -> Result<Instance> {
    let first = parts.first().ok_or_else(|| Error::Internal("coproduct of zero instances".into()))?;
    for p in parts {
        same_schema(first, p)?;
    }
    let mut out = Instance::empty(first.schema.clone());
    let mut offset: HashMap<&str, u64> = HashMap::new();
    for part in parts {
        let mut rename: HashMap<&str, HashMap<RowId, RowId>> = HashMap::new();
        for (node, rows) in &part.rows {
            let base = offset.entry(node).or_insert(0);
            let fresh = out.rows.get_mut(node).expect("same schema");
            let map = rename.entry(node).or_default();
            for r in rows {
                fresh.insert(RowId(*base));
                map.insert(*r, RowId(*base));
                *base += 1;
            }
        }
        for ((node, edge), f) in &part.edges {
            let target = &part.schema.edge(node, edge).expect("schema edge").target;
            let (src, tgt) = (&rename[node.as_str()], &rename[target.as_str()]);
            let g = out.edges.get_mut(&(node.clone(), edge.clone())).expect("same schema");
            g.extend(f.iter().map(|(x, y)| (src[x], tgt[y])));
        }
        for ((node, attr), f) in &part.attrs {
            let src = &rename[node.as_str()];
            let g = out.attrs.get_mut(&(node.clone(), attr.clone())).expect("same schema");
            g.extend(f.iter().map(|(x, v)| (src[x], v.clone())));
        }
    }
    Ok(out)
}

/// Output of [`relationalize_with`].
#[derive(Clone, Debug)]
pub struct Relationalized {
    pub instance: Instance,
    /// Nodes with no attribute reachable that had several rows merged into one.
    pub collapsed: Vec<String>,
}

/// Quotient by observational equivalence, see [`relationalize_with`].
pub fn relationalize(i: &Instance) -> Instance {
    relationalize_with(i, Strategy::default()).instance
}

/// Merges rows that no attribute-terminated path can tell apart.
///
/// Moore-style partition refinement: start from blocks keyed by node and
/// direct attribute tuple, then split by the vector of blocks reached along
/// each outgoing edge until the block count stops growing. Each block keeps its
/// smallest row id.
pub fn relationalize_with(i: &Instance, strategy: Strategy) -> Relationalized {
    let blocks = refine(&[i], strategy);
    let blocks = &blocks[0];
    let schema = i.schema.clone();

    let mut rep: HashMap<u32, RowId> = HashMap::new();
    let mut collapsed = Vec::new();
    let observable = schema.observable_nodes();
    for (node, rows) in &i.rows {
        let mut seen = 0;
        for r in rows {
            let blk = blocks[node][r];
            if let std::collections::hash_map::Entry::Vacant(v) = rep.entry(blk) {
                v.insert(*r);
                seen += 1;
            }
        }
        if rows.len() > 1 && seen == 1 && !observable.contains(node) {
            collapsed.push(node.clone());
        }
    }
    // representative of each row, per node
    let canon: BTreeMap<&str, HashMap<RowId, RowId>> = i
        .rows
        .iter()
        .map(|(node, rows)| {
            let bl = &blocks[node];
            (node.as_str(), rows.iter().map(|r| (*r, rep[&bl[r]])).collect())
        })
        .collect();

    let mut out = Instance::empty(schema.clone());
    for (node, rows) in &i.rows {
        let c = &canon[node.as_str()];
        out.rows.get_mut(node).expect("node exists").extend(rows.iter().filter(|r| c[*r] == **r));
    }
    for ((node, edge), f) in &i.edges {
        let target = &schema.edge(node, edge).expect("schema edge").target;
        let (c, ct) = (&canon[node.as_str()], &canon[target.as_str()]);
        let g = out.edges.get_mut(&(node.clone(), edge.clone())).expect("edge exists");
        g.extend(f.iter().filter(|(x, _)| c[*x] == **x).map(|(x, y)| (*x, ct[y])));
    }
    for ((node, attr), f) in &i.attrs {
        let c = &canon[node.as_str()];
        let g = out.attrs.get_mut(&(node.clone(), attr.clone())).expect("attribute exists");
        g.extend(f.iter().filter(|(x, _)| c[*x] == **x).map(|(x, v)| (*x, v.clone())));
    }
    Relationalized { instance: out, collapsed }
}

/// Block of every row, per node.
pub(crate) type Blocks = BTreeMap<String, HashMap<RowId, u32>>;

/// Coarsest edge- and attribute-compatible partition over the rows of several
/// instances on one schema, computed jointly so block ids are comparable
/// across them. Returns, per instance, the block of each row.
pub(crate) fn refine(parts: &[&Instance], strategy: Strategy) -> Vec<Blocks> {
    let schema = parts[0].schema.clone();
    let nodes: Vec<&str> = schema.nodes().collect();

    // items are numbered part by part, node by node, in row order
    let mut base: Vec<BTreeMap<&str, usize>> = Vec::new();
    let mut items: Vec<(usize, usize, RowId)> = Vec::new();
    for (k, part) in parts.iter().enumerate() {
        let mut b = BTreeMap::new();
        for (n, node) in nodes.iter().enumerate() {
            b.insert(*node, items.len());
            items.extend(part.rows[*node].iter().map(|r| (k, n, *r)));
        }
        base.push(b);
    }
    let position = |k: usize, node: &str| -> HashMap<RowId, usize> {
        parts[k].rows[node].iter().enumerate().map(|(i, r)| (*r, base[k][node] + i)).collect()
    };

    let mut values: Vec<Vec<Value>> = vec![Vec::new(); items.len()];
    let mut targets: Vec<Vec<usize>> = vec![Vec::new(); items.len()];
    for (k, part) in parts.iter().enumerate() {
        let positions: BTreeMap<&str, HashMap<RowId, usize>> = nodes.iter().map(|n| (*n, position(k, n))).collect();
        for node in &nodes {
            let at = &positions[node];
            for a in schema.attributes_of(node) {
                for (r, v) in part.attr_fn(node, &a.name) {
                    values[at[r]].push(v.clone());
                }
            }
            for e in schema.edges_from(node) {
                let to = &positions[e.target.as_str()];
                for (r, y) in part.edge_fn(node, &e.name) {
                    targets[at[r]].push(to[y]);
                }
            }
        }
    }
    let initial: Vec<(usize, Vec<Value>)> = items.iter().map(|(_, n, _)| *n).zip(values).collect();

    let (mut block, mut count) = number(initial);
    loop {
        let sigs: Vec<Vec<u32>> = exec::map(strategy, &targets, |ts| ts.iter().map(|t| block[*t]).collect());
        let (next, next_count) = number(block.iter().copied().zip(sigs).collect::<Vec<_>>());
        block = next;
        if next_count == count {
            break;
        }
        count = next_count;
    }

    let empty: Blocks = nodes.iter().map(|n| ((*n).to_owned(), HashMap::new())).collect();
    let mut out: Vec<Blocks> = vec![empty; parts.len()];
    for ((k, n, r), b) in items.into_iter().zip(block) {
        out[k].get_mut(nodes[n]).expect("schema node").insert(r, b);
    }
    out
}

/// Dense ids for signatures, in order of first appearance.
fn number<S: std::hash::Hash + Eq>(sigs: Vec<S>) -> (Vec<u32>, usize) {
    let mut ids: HashMap<S, u32> = HashMap::new();
    let mut out = Vec::with_capacity(sigs.len());
    for s in sigs {
        let next = ids.len() as u32;
        out.push(*ids.entry(s).or_insert(next));
    }
    (out, ids.len())
}

/// `relationalize(disjoint_union(i, j))`.
pub fn union(i: &Instance, j: &Instance) -> Result<Instance> {
    Ok(relationalize(&disjoint_union(i, j)?))
}

/// Union of any number of instances on one schema; a single argument is
/// just relationalized.
pub fn union_all(parts: &[Instance]) -> Result<Instance> {
    let refs: Vec<&Instance> = parts.iter().collect();
    Ok(relationalize(&disjoint_union_all(&refs)?))
}
