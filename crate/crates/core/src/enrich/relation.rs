//! Binary relations as instances on the span schema
//! `left, right : is-a -> Material`, `name : Material -> string`, and parent
//! functions as instances on `parent : Material -> Material`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::{self, Strategy};
use crate::instance::{union_all, Datum, Instance, InstanceBuilder, RowId};
use crate::kernel::{BaseType, Mapping, Path, Schema};
use crate::migrate::delta;
use crate::query::{eval_query_with, parse_query, RESULT_NODE};
use crate::value::Value;

pub const RELATION: &str = "is-a";
pub const ELEMENT: &str = "Material";
pub const LEFT: &str = "left";
pub const RIGHT: &str = "right";
pub const PARENT: &str = "parent";
pub const NAME: &str = "name";

pub fn relation_schema() -> Arc<Schema> {
    Arc::new(
        Schema::builder("T")
            .node(RELATION)
            .node(ELEMENT)
            .edge(LEFT, RELATION, ELEMENT)
            .edge(RIGHT, RELATION, ELEMENT)
            .attribute(NAME, ELEMENT, BaseType::String)
            .build()
            .expect("span schema is well formed"),
    )
}

pub fn parent_schema() -> Arc<Schema> {
    Arc::new(
        Schema::builder("S")
            .node(ELEMENT)
            .edge(PARENT, ELEMENT, ELEMENT)
            .attribute(NAME, ELEMENT, BaseType::String)
            .build()
            .expect("parent schema is well formed"),
    )
}

/// `F_n : T -> S` with `left` sent to the identity and `right` to `parent^n`.
pub fn build_fn(n: usize, target: &Arc<Schema>) -> Result<Mapping> {
    Mapping::builder(format!("F{n}"), relation_schema(), target.clone())
        .node(RELATION, ELEMENT)
        .node(ELEMENT, ELEMENT)
        .edge(RELATION, LEFT, Path::id(ELEMENT))
        .edge(RELATION, RIGHT, Path::edges(ELEMENT, vec![PARENT; n]))
        .attribute_path(ELEMENT, NAME, Path::id(ELEMENT).with_terminal(NAME))
        .build()
}

/// Reflexive-transitive closure of a parent function as the union of
/// `delta(F_k, parents)` for `k = 0..=n`. Exact once `n + 1` reaches the
/// number of elements.
pub fn transitive_closure(parents: &Instance, n: usize) -> Result<Instance> {
    transitive_closure_with(parents, n, Strategy::default())
}

pub fn transitive_closure_with(parents: &Instance, n: usize, strategy: Strategy) -> Result<Instance> {
    let ks: Vec<usize> = (0..=n).collect();
    let parts = exec::try_map(strategy, &ks, |&k| delta(&build_fn(k, parents.schema())?, parents))?;
    union_all(&parts)
}

fn check_shape(i: &Instance, want: &Schema, what: &str) -> Result<()> {
    let s = i.schema();
    let same = s.nodes().eq(want.nodes())
        && s.edges().eq(want.edges())
        && s.attributes().eq(want.attributes())
        && s.equations().is_empty();
    if same {
        Ok(())
    } else {
        Err(Error::Enrichment(format!("`{}` is not a {what} instance", s.name())))
    }
}

fn name_of(i: &Instance, row: RowId) -> Result<Value> {
    i.attr(ELEMENT, NAME, row)
        .cloned()
        .ok_or_else(|| Error::Internal(format!("element {row} has no name")))
}

/// The `(left name, right name)` pairs of a relation instance.
pub fn relation_pairs(r: &Instance) -> Result<BTreeSet<(Value, Value)>> {
    check_shape(r, &relation_schema(), "relation")?;
    let mut out = BTreeSet::new();
    for x in r.rows(RELATION) {
        let l = r.edge(RELATION, LEFT, x).ok_or_else(|| Error::Internal("left undefined".into()))?;
        let rt = r.edge(RELATION, RIGHT, x).ok_or_else(|| Error::Internal("right undefined".into()))?;
        out.insert((name_of(r, l)?, name_of(r, rt)?));
    }
    Ok(out)
}

/// Names of all elements of a relation instance, related or not.
pub fn relation_names(r: &Instance) -> Result<BTreeSet<Value>> {
    check_shape(r, &relation_schema(), "relation")?;
    r.rows(ELEMENT).map(|x| name_of(r, x)).collect()
}

/// Builds a relation with one element per distinct name in `names` or in a
/// pair, and one related row per distinct pair.
pub fn relation_from(names: &BTreeSet<Value>, pairs: &BTreeSet<(Value, Value)>) -> Instance {
    let mut b = Instance::builder(relation_schema());
    let mut ids: BTreeMap<&Value, RowId> = BTreeMap::new();
    let all = names.iter().chain(pairs.iter().flat_map(|(a, c)| [a, c]));
    for v in all {
        if !ids.contains_key(v) {
            let id = RowId(ids.len() as u64);
            ids.insert(v, id);
            b.add_row(ELEMENT, id).expect("node exists");
            b.set_attr(ELEMENT, NAME, id, v.clone()).expect("attribute exists");
        }
    }
    for (k, (a, c)) in pairs.iter().enumerate() {
        let row = RowId(k as u64);
        b.add_row(RELATION, row).expect("node exists");
        b.set_edge(RELATION, LEFT, row, ids[a]).expect("edge exists");
        b.set_edge(RELATION, RIGHT, row, ids[c]).expect("edge exists");
    }
    b.finish()
}

pub fn relation_from_pairs<S: AsRef<str>>(pairs: &[(S, S)]) -> Instance {
    let set = pairs.iter().map(|(a, b)| (Value::str(a.as_ref()), Value::str(b.as_ref()))).collect();
    relation_from(&BTreeSet::new(), &set)
}

/// Parent function from `(child, parent)` name pairs; names that never occur
/// as a child are their own parent.
pub fn function_from_pairs<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<Instance> {
    let mut parent: BTreeMap<&str, &str> = BTreeMap::new();
    for (c, p) in pairs {
        if let Some(old) = parent.insert(c.as_ref(), p.as_ref()) {
            if old != p.as_ref() {
                return Err(Error::Enrichment(format!("`{}` has two parents, `{old}` and `{}`", c.as_ref(), p.as_ref())));
            }
        }
    }
    let names: BTreeSet<&str> = pairs.iter().flat_map(|(a, b)| [a.as_ref(), b.as_ref()]).collect();
    let ids: BTreeMap<&str, RowId> = names.iter().enumerate().map(|(k, n)| (*n, RowId(k as u64))).collect();
    let mut b = Instance::builder(parent_schema());
    for (n, id) in &ids {
        b.add_row(ELEMENT, *id)?;
        b.set_attr(ELEMENT, NAME, *id, Value::str(*n))?;
        b.set_edge(ELEMENT, PARENT, *id, ids[parent.get(n).unwrap_or(n)])?;
    }
    b.build()
}

/// Converts any relation-shaped instance onto the canonical span schema.
pub fn canonical_relation(r: &Instance) -> Result<Instance> {
    Ok(relation_from(&relation_names(r)?, &relation_pairs(r)?))
}

/// `op(R)`: `delta` along the automorphism of the span swapping `left` and
/// `right`.
pub fn op_relation(r: &Instance) -> Result<Instance> {
    let r = canonical_relation(r)?;
    let t = relation_schema();
    let swap = Mapping::builder("swap", t.clone(), t)
        .node(RELATION, RELATION)
        .node(ELEMENT, ELEMENT)
        .edge(RELATION, LEFT, Path::edges(RELATION, [RIGHT]))
        .edge(RELATION, RIGHT, Path::edges(RELATION, [LEFT]))
        .attribute_path(ELEMENT, NAME, Path::id(ELEMENT).with_terminal(NAME))
        .build()?;
    delta(&swap, &r)
}

fn pair_schema() -> Arc<Schema> {
    Arc::new(
        Schema::builder("pair")
            .node("r1")
            .node("r2")
            .node("e1")
            .node("e2")
            .edge(LEFT, "r1", "e1")
            .edge(RIGHT, "r1", "e1")
            .edge(LEFT, "r2", "e2")
            .edge(RIGHT, "r2", "e2")
            .attribute(NAME, "e1", BaseType::String)
            .attribute(NAME, "e2", BaseType::String)
            .build()
            .expect("pair schema is well formed"),
    )
}

/// Places two relations side by side in one instance.
fn side_by_side(r1: &Instance, r2: &Instance) -> Result<Instance> {
    let mut b = InstanceBuilder::from(Instance::empty(pair_schema()));
    for (r, rel, el) in [(r1, "r1", "e1"), (r2, "r2", "e2")] {
        for x in r.rows(ELEMENT) {
            b.add_row(el, x)?;
            b.set_attr(el, NAME, x, name_of(r, x)?)?;
        }
        for x in r.rows(RELATION) {
            b.add_row(rel, x)?;
            for e in [LEFT, RIGHT] {
                let y = r.edge(RELATION, e, x).ok_or_else(|| Error::Internal("edge undefined".into()))?;
                b.set_edge(rel, e, x, y)?;
            }
        }
    }
    b.build()
}

/// `R1 ; R2` by a select/from/where query joining the middle names.
pub fn compose_relations(r1: &Instance, r2: &Instance) -> Result<Instance> {
    compose_relations_with(r1, r2, Strategy::default())
}

pub fn compose_relations_with(r1: &Instance, r2: &Instance, strategy: Strategy) -> Result<Instance> {
    check_shape(r1, &relation_schema(), "relation")?;
    check_shape(r2, &relation_schema(), "relation")?;
    let both = side_by_side(r1, r2)?;
    let q = parse_query(
        "select p.left.name as l, q.right.name as r from r1 as p, r2 as q where p.right.name = q.left.name",
    )?;
    let res = eval_query_with(&q, &both, strategy)?;
    let mut pairs = BTreeSet::new();
    for x in res.rows(RESULT_NODE) {
        let get = |a: &str| res.eval_path(&Path::id(RESULT_NODE).with_terminal(a), x);
        if let (Datum::Value(l), Datum::Value(r)) = (get("l")?, get("r")?) {
            pairs.insert((l, r));
        }
    }
    Ok(relation_from(&BTreeSet::new(), &pairs))
}

/// Reflexive-transitive closure of a relation: the diagonal on its elements
/// united with `R^k` for `k = 1..=n`.
pub fn relation_closure(r: &Instance, n: usize) -> Result<Instance> {
    relation_closure_with(r, n, Strategy::default())
}

pub fn relation_closure_with(r: &Instance, n: usize, strategy: Strategy) -> Result<Instance> {
    let names = relation_names(r)?;
    let diag: BTreeSet<(Value, Value)> = names.iter().map(|v| (v.clone(), v.clone())).collect();
    let mut acc = relation_from(&names, &diag);
    let mut power = acc.clone();
    let r = canonical_relation(r)?;
    for _ in 0..n {
        power = compose_relations_with(&power, &r, strategy)?;
        let before = relation_pairs(&acc)?.len();
        acc = canonical_relation(&union_all(&[acc, power.clone()])?)?;
        if relation_pairs(&acc)?.len() == before {
            break;
        }
    }
    Ok(acc)
}

/// `isa' = closure(op(syn) ; isa ; syn, n)`: the ontology relation carried
/// over to the vocabulary on the right of `syn`.
pub fn translate_isa(isa: &Instance, syn: &Instance, n: usize) -> Result<Instance> {
    let inner = compose_relations(&compose_relations(&op_relation(syn)?, isa)?, syn)?;
    relation_closure(&inner, n)
}
