//! Random generators and brute-force oracles shared by the property and
//! acceptance tests. Everything is driven by a seeded ChaCha stream so a
//! failing case can be replayed from its seed.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use catql::instance::Instance;
use catql::query::{Binding, Equality, Operand, PathExpr, Query, SelectItem, RESULT_NODE};
use catql::{BaseType, Mapping, Path, RowId, Schema, Value};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BOUND: usize = 64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- schemas

pub struct SchemaShape {
    pub max_nodes: usize,
    pub max_edges: usize,
    pub max_equations: usize,
    /// Probability that a node carries an integer attribute `v`.
    pub int_attr: f64,
    /// Probability that a node carries a string attribute `w`.
    pub str_attr: f64,
}

impl Default for SchemaShape {
    fn default() -> Self {
        SchemaShape { max_nodes: 3, max_edges: 4, max_equations: 1, int_attr: 0.7, str_attr: 0.3 }
    }
}

/// A random schema whose hom-sets are all finite (checked up to [`BOUND`]).
/// Rejection sampling; gives up after a few hundred tries with a discrete one.
pub fn random_schema(r: &mut impl Rng, name: &str, shape: &SchemaShape) -> Arc<Schema> {
    for _ in 0..500 {
        if let Some(s) = try_schema(r, name, shape) {
            return s;
        }
    }
    Arc::new(Schema::builder(name).node("n0").build().unwrap())
}

fn try_schema(r: &mut impl Rng, name: &str, shape: &SchemaShape) -> Option<Arc<Schema>> {
    let k = r.gen_range(1..=shape.max_nodes);
    let nodes: Vec<String> = (0..k).map(|i| format!("n{i}")).collect();
    let mut b = Schema::builder(name);
    for n in &nodes {
        b = b.node(n);
        if r.gen_bool(shape.int_attr) {
            b = b.attribute("v", n, BaseType::Integer);
        }
        if r.gen_bool(shape.str_attr) {
            b = b.attribute("w", n, BaseType::String);
        }
    }
    let m = r.gen_range(0..=shape.max_edges);
    let mut edges = Vec::new();
    for i in 0..m {
        let (s, t) = (nodes.choose(r).unwrap().clone(), nodes.choose(r).unwrap().clone());
        b = b.edge(format!("e{i}"), &s, &t);
        edges.push((format!("e{i}"), s, t));
    }
    if shape.max_equations > 0 && !edges.is_empty() && r.gen_bool(0.5) {
        // two distinct parallel paths of length 1..=2
        let mut paths: Vec<(Path, String)> = Vec::new();
        for (e, s, t) in &edges {
            paths.push((Path::edges(s.as_str(), [e.as_str()]), t.clone()));
            for (e2, s2, t2) in &edges {
                if s2 == t {
                    paths.push((Path::edges(s.as_str(), [e.as_str(), e2.as_str()]), t2.clone()));
                }
            }
        }
        let a = paths.choose(r).unwrap().clone();
        let parallel: Vec<_> =
            paths.iter().filter(|(p, t)| p.source == a.0.source && *t == a.1 && *p != a.0).cloned().collect();
        if let Some(c) = parallel.choose(r) {
            b = b.equation(a.0, c.0.clone());
        }
    }
    let s = b.build().ok()?;
    for x in s.nodes() {
        for y in s.nodes() {
            let homs = s.enumerate_morphisms(x, y, BOUND).ok()?;
            if homs.len() > 8 {
                return None;
            }
        }
    }
    Some(Arc::new(s))
}

/// A random mapping into `target` from a fresh random source schema.
///
/// Source edges are chosen as images first (any morphism between the images
/// of their endpoints), so the mapping is a functor by construction. The
/// source is acyclic and has no equations. Source attributes map to target attribute paths
/// of the same type.
pub fn random_mapping(r: &mut impl Rng, source_name: &str, target: &Arc<Schema>) -> Option<Mapping> {
    let tnodes: Vec<String> = target.nodes().map(str::to_owned).collect();
    let k = r.gen_range(1..=3);
    let images: Vec<String> = (0..k).map(|_| tnodes.choose(r).unwrap().clone()).collect();
    let snodes: Vec<String> = (0..k).map(|i| format!("m{i}")).collect();

    // attribute paths reachable from each target node, by type
    let attr_paths = |from: &str| -> Vec<(Path, BaseType)> {
        let mut out = Vec::new();
        for t in target.nodes() {
            for p in target.enumerate_morphisms(from, t, BOUND).unwrap_or_default() {
                for a in target.attributes_of(t) {
                    out.push((p.clone().with_terminal(a.name.clone()), a.ty));
                }
            }
        }
        out
    };

    let mut sb = Schema::builder(source_name);
    let mut edge_images = Vec::new();
    let mut attr_images = Vec::new();
    for (i, n) in snodes.iter().enumerate() {
        sb = sb.node(n);
        let avail = attr_paths(&images[i]);
        if let Some((p, ty)) = avail.choose(r).filter(|_| r.gen_bool(0.7)) {
            sb = sb.attribute("v", n, *ty);
            attr_images.push((n.clone(), p.clone()));
        }
    }
    // forward edges only, so the source is acyclic and its hom-sets finite
    let m = if k > 1 { r.gen_range(0..=3) } else { 0 };
    for e in 0..m {
        let i = r.gen_range(0..k - 1);
        let j = r.gen_range(i + 1..k);
        let homs = target.enumerate_morphisms(&images[i], &images[j], BOUND).ok()?;
        if let Some(p) = homs.choose(r) {
            sb = sb.edge(format!("f{e}"), &snodes[i], &snodes[j]);
            edge_images.push((snodes[i].clone(), format!("f{e}"), p.clone()));
        }
    }
    let source = Arc::new(sb.build().ok()?);
    for x in source.nodes() {
        for y in source.nodes() {
            if source.enumerate_morphisms(x, y, BOUND).ok()?.len() > 8 {
                return None;
            }
        }
    }
    let mut mb = Mapping::builder(format!("F_{source_name}"), source, target.clone()).bound(BOUND);
    for (n, img) in snodes.iter().zip(&images) {
        mb = mb.node(n, img);
    }
    for (n, e, p) in edge_images {
        mb = mb.edge(&n, &e, p);
    }
    for (n, p) in attr_images {
        mb = mb.attribute_path(&n, "v", p);
    }
    mb.build().ok()
}

// ---------------------------------------------------------------- instances

/// A random valid instance with at most `max_rows` rows per node. Attribute
/// values come from a domain of `domain` integers (strings are their decimal
/// text prefixed with `s`). Rows violating an equation are redrawn a few
/// times, then the instance falls back to empty.
pub fn random_instance(r: &mut impl Rng, s: &Arc<Schema>, max_rows: usize, domain: i64) -> Instance {
    for _ in 0..50 {
        let i = draw_instance(r, s, max_rows, domain);
        if i.validate().is_ok() {
            return i;
        }
    }
    Instance::empty(s.clone())
}

fn draw_instance(r: &mut impl Rng, s: &Arc<Schema>, max_rows: usize, domain: i64) -> Instance {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for n in s.nodes() {
        counts.insert(n.to_owned(), r.gen_range(0..=max_rows as u64));
    }
    // an edge into an empty node forces its source empty too
    loop {
        let mut changed = false;
        for e in s.edges() {
            if counts[&e.target] == 0 && counts[&e.source] != 0 {
                counts.insert(e.source.clone(), 0);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut b = Instance::builder(s.clone());
    // sparse, unordered row ids
    let mut ids: BTreeMap<String, Vec<RowId>> = BTreeMap::new();
    for (n, &c) in &counts {
        let mut pool: Vec<u64> = (0..c * 3).collect();
        pool.shuffle(r);
        let rows: Vec<RowId> = pool.into_iter().take(c as usize).map(RowId).collect();
        for &x in &rows {
            b.add_row(n, x).unwrap();
        }
        ids.insert(n.clone(), rows);
    }
    for e in s.edges() {
        for &x in &ids[&e.source] {
            let y = *ids[&e.target].choose(r).unwrap();
            b.set_edge(&e.source, &e.name, x, y).unwrap();
        }
    }
    for a in s.attributes() {
        for &x in &ids[&a.source] {
            let k = r.gen_range(0..domain.max(1));
            b.set_attr(&a.source, &a.name, x, value_of(a.ty, k)).unwrap();
        }
    }
    b.build().unwrap_or_else(|_| Instance::empty(s.clone()))
}

pub fn value_of(ty: BaseType, k: i64) -> Value {
    match ty {
        BaseType::Integer => Value::Int(k),
        BaseType::String => Value::Str(format!("s{k}")),
    }
}

// ---------------------------------------------------------------- relations

/// A random parent function on `n` elements named `m0..`; element 0 and a few
/// others are roots (their own parent), everything else points to a smaller
/// index, so the function is a forest.
pub fn random_parents(r: &mut impl Rng, n: usize) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for i in 0..n {
        let p = if i == 0 || r.gen_bool(0.1) { i } else { r.gen_range(0..i) };
        out.push((format!("m{i}"), format!("m{p}")));
    }
    out
}

/// Reflexive-transitive closure of `pairs` over `elements` by Floyd-Warshall.
pub fn floyd_warshall(elements: &[String], pairs: &[(String, String)]) -> BTreeSet<(String, String)> {
    let idx: BTreeMap<&str, usize> = elements.iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();
    let n = elements.len();
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in pairs {
        reach[idx[a.as_str()]][idx[b.as_str()]] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if reach[i][j] {
                out.insert((elements[i].clone(), elements[j].clone()));
            }
        }
    }
    out
}

pub fn string_pairs(pairs: &BTreeSet<(Value, Value)>) -> BTreeSet<(String, String)> {
    pairs
        .iter()
        .map(|(a, b)| match (a, b) {
            (Value::Str(a), Value::Str(b)) => (a.clone(), b.clone()),
            other => panic!("non-string relation entry {other:?}"),
        })
        .collect()
}

/// A random relation on names `m0..m{n-1}`.
pub fn random_relation(r: &mut impl Rng, n: usize, density: f64) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if r.gen_bool(density) {
                out.push((format!("m{i}"), format!("m{j}")));
            }
        }
    }
    out
}

// ---------------------------------------------------------------- queries

pub struct QueryShape {
    pub max_bindings: usize,
    pub max_conditions: usize,
    /// Allow attribute-to-attribute equalities, which only direct evaluation
    /// supports.
    pub attr_equalities: bool,
    /// Allow disjunctive groups.
    pub disjunctions: bool,
}

/// A random query that typechecks against `s`, or `None` if `s` has no
/// attributes at all.
pub fn random_query(r: &mut impl Rng, s: &Schema, shape: &QueryShape) -> Option<Query> {
    if s.attributes().next().is_none() {
        return None;
    }
    let nodes: Vec<String> = s.nodes().map(str::to_owned).collect();
    let k = r.gen_range(1..=shape.max_bindings);
    let from: Vec<Binding> =
        (0..k).map(|i| Binding { node: nodes.choose(r).unwrap().clone(), var: format!("x{i}") }).collect();

    let walk = |r: &mut dyn rand::RngCore, b: &Binding| -> (PathExpr, String) {
        let mut node = b.node.clone();
        let mut steps = Vec::new();
        for _ in 0..r.gen_range(0..=2) {
            let out: Vec<_> = s.edges_from(&node).collect();
            if let Some(e) = out.choose(r) {
                steps.push(e.name.clone());
                node = e.target.clone();
            }
        }
        (PathExpr { var: b.var.clone(), steps }, node)
    };
    // an attribute path from some binding, with its type
    let attr_path = |r: &mut dyn rand::RngCore| -> Option<(PathExpr, BaseType)> {
        for _ in 0..20 {
            let b = from.choose(r).unwrap();
            let (mut p, end) = walk(r, b);
            let attrs: Vec<_> = s.attributes_of(&end).collect();
            if let Some(a) = attrs.choose(r) {
                p.steps.push(a.name.clone());
                return Some((p, a.ty));
            }
        }
        None
    };

    let mut select = Vec::new();
    for c in 0..r.gen_range(1..=3) {
        if let Some((p, _)) = attr_path(r) {
            select.push(SelectItem { expr: p, alias: format!("c{c}") });
        }
    }
    if select.is_empty() {
        return None;
    }

    let mut conditions = Vec::new();
    for _ in 0..r.gen_range(0..=shape.max_conditions) {
        let width = if shape.disjunctions { r.gen_range(1..=2) } else { 1 };
        let mut group = Vec::new();
        for _ in 0..width {
            if let Some(e) = random_equality(r, s, &from, shape, &walk, &attr_path) {
                group.push(e);
            }
        }
        if !group.is_empty() {
            conditions.push(group);
        }
    }
    Some(Query { select, from, conditions })
}

fn random_equality(
    r: &mut impl Rng,
    _s: &Schema,
    from: &[Binding],
    shape: &QueryShape,
    walk: &dyn Fn(&mut dyn rand::RngCore, &Binding) -> (PathExpr, String),
    attr_path: &dyn Fn(&mut dyn rand::RngCore) -> Option<(PathExpr, BaseType)>,
) -> Option<Equality> {
    let kind = r.gen_range(0..if shape.attr_equalities { 3 } else { 2 });
    match kind {
        0 => {
            // row equality between two paths ending at the same node
            for _ in 0..20 {
                let (a, b) = (from.choose(r).unwrap(), from.choose(r).unwrap());
                let (p, n) = walk(r, a);
                let (q, m) = walk(r, b);
                if n == m {
                    return Some(Equality { lhs: Operand::Path(p), rhs: Operand::Path(q) });
                }
            }
            None
        }
        1 => {
            let (p, ty) = attr_path(r)?;
            let lit = Operand::Lit(value_of(ty, r.gen_range(0..3)));
            let path = Operand::Path(p);
            Some(if r.gen_bool(0.5) { Equality { lhs: path, rhs: lit } } else { Equality { lhs: lit, rhs: path } })
        }
        _ => {
            for _ in 0..20 {
                let (p, a) = attr_path(r)?;
                let (q, b) = attr_path(r)?;
                if a == b {
                    return Some(Equality { lhs: Operand::Path(p), rhs: Operand::Path(q) });
                }
            }
            None
        }
    }
}

/// Follows `steps` from `row` of `node`; the last step may be an attribute.
fn follow(i: &Instance, node: &str, row: RowId, steps: &[String]) -> Operandish {
    let s = i.schema();
    let (mut node, mut row) = (node.to_owned(), row);
    for (k, step) in steps.iter().enumerate() {
        if let Some(e) = s.edge(&node, step) {
            row = i.edge(&node, step, row).expect("total edge");
            node = e.target.clone();
        } else {
            assert_eq!(k + 1, steps.len(), "attribute in the middle of a path");
            return Operandish::Value(i.attr(&node, step, row).expect("total attribute").clone());
        }
    }
    Operandish::Row(node, row)
}

#[derive(PartialEq)]
enum Operandish {
    Row(String, RowId),
    Value(Value),
}

/// Naive Cartesian-product-and-filter evaluation: the set of selected tuples,
/// in select order.
pub fn naive_eval(q: &Query, i: &Instance) -> BTreeSet<Vec<Value>> {
    let mut out = BTreeSet::new();
    let domains: Vec<Vec<RowId>> = q.from.iter().map(|b| i.rows(&b.node).collect()).collect();
    let mut choice = vec![0usize; q.from.len()];
    if domains.iter().any(Vec::is_empty) {
        return out;
    }
    loop {
        let env: BTreeMap<&str, (&str, RowId)> = q
            .from
            .iter()
            .zip(&choice)
            .zip(&domains)
            .map(|((b, &c), d)| (b.var.as_str(), (b.node.as_str(), d[c])))
            .collect();
        let operand = |o: &Operand| match o {
            Operand::Lit(v) => Operandish::Value(v.clone()),
            Operand::Path(p) => {
                let (n, x) = env[p.var.as_str()];
                follow(i, n, x, &p.steps)
            }
        };
        let holds =
            q.conditions.iter().all(|g| g.iter().any(|e| operand(&e.lhs) == operand(&e.rhs)));
        if holds {
            let tuple = q
                .select
                .iter()
                .map(|s| match operand(&Operand::Path(s.expr.clone())) {
                    Operandish::Value(v) => v,
                    Operandish::Row(..) => panic!("row-valued select"),
                })
                .collect();
            out.insert(tuple);
        }
        // odometer
        let mut k = 0;
        loop {
            if k == choice.len() {
                return out;
            }
            choice[k] += 1;
            if choice[k] < domains[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Tuples of a query result, columns in the order of `aliases`.
pub fn result_tuples(result: &Instance, aliases: &[String]) -> BTreeSet<Vec<Value>> {
    result
        .rows(RESULT_NODE)
        .map(|x| aliases.iter().map(|a| result.attr(RESULT_NODE, a, x).unwrap().clone()).collect())
        .collect()
}

pub fn aliases(q: &Query) -> Vec<String> {
    q.select.iter().map(|s| s.alias.clone()).collect()
}

// ---------------------------------------------------------------- sql

/// A random file in the supported SQL dialect: up to three tables, each with
/// an integer key, a few typed columns (some foreign keys) and rows with
/// sparse ids, inserted in a shuffled order across several statements.
pub fn random_sql(r: &mut impl Rng) -> String {
    let k = r.gen_range(1..=3);
    let mut ids: Vec<Vec<i64>> = Vec::new();
    for _ in 0..k {
        let mut pool: Vec<i64> = (1..40).collect();
        pool.shuffle(r);
        ids.push(pool.into_iter().take(r.gen_range(1..=5)).collect());
    }
    enum Col {
        Int,
        Str,
        Fk(usize),
    }
    let mut text = String::from("-- generated\n");
    let mut cols: Vec<Vec<(String, Col)>> = Vec::new();
    for t in 0..k {
        let mut cs = Vec::new();
        for c in 0..r.gen_range(0..=3) {
            let col = match r.gen_range(0..3) {
                0 => Col::Int,
                1 => Col::Str,
                _ => Col::Fk(r.gen_range(0..k)),
            };
            cs.push((format!("c{c}"), col));
        }
        let key = if r.gen_bool(0.5) { "id" } else { "ID" };
        text.push_str(&format!("CREATE TABLE t{t} (\n  {key} INT PRIMARY KEY"));
        for (name, col) in &cs {
            match col {
                Col::Int => text.push_str(&format!(",\n  {name} INTEGER")),
                Col::Str => text.push_str(&format!(",\n  {name} VARCHAR(40)")),
                Col::Fk(u) => text.push_str(&format!(",\n  {name} INT REFERENCES t{u}(id)")),
            }
        }
        text.push_str("\n);\n");
        cols.push(cs);
    }
    let mut tuples: Vec<(usize, String)> = Vec::new();
    for t in 0..k {
        for &id in &ids[t] {
            let mut vals = vec![id.to_string()];
            for (_, col) in &cols[t] {
                vals.push(match col {
                    Col::Int if r.gen_bool(0.1) => "NULL".into(),
                    Col::Int => r.gen_range(-5..5).to_string(),
                    Col::Str if r.gen_bool(0.1) => "NULL".into(),
                    Col::Str => random_sql_string(r),
                    Col::Fk(u) => ids[*u].choose(r).unwrap().to_string(),
                });
            }
            tuples.push((t, format!("({})", vals.join(", "))));
        }
    }
    tuples.shuffle(r);
    for chunk in tuples.chunks(2) {
        for (t, tuple) in chunk {
            text.push_str(&format!("INSERT INTO t{t} VALUES {tuple};\n"));
        }
    }
    text
}

fn random_sql_string(r: &mut impl Rng) -> String {
    let pieces = ["a", "b", " ", "it's", "x\"y", "--", "(", ",", ";", "EDM"];
    let s: String = (0..r.gen_range(0..4)).map(|_| *pieces.choose(r).unwrap()).collect();
    if r.gen_bool(0.5) {
        format!("'{}'", s.replace('\'', "''"))
    } else {
        format!("\"{}\"", s.replace('"', "\"\""))
    }
}

/// Shuffles the INSERT statements of a generated file.
pub fn shuffle_inserts(r: &mut impl Rng, text: &str) -> String {
    let (mut head, mut inserts) = (Vec::new(), Vec::new());
    for line in text.lines() {
        if line.starts_with("INSERT") {
            inserts.push(line);
        } else {
            head.push(line);
        }
    }
    inserts.shuffle(r);
    head.extend(inserts);
    head.join("\n")
}

// ---------------------------------------------------------------- adjunctions

pub const HOM_LIMIT: usize = 200_000;

pub enum Case {
    Checked,
    /// The draw fell outside what the migrations accept (an attribute clash
    /// under sigma, an attribute pi cannot determine, or a hom count past
    /// [`HOM_LIMIT`]).
    Skipped(String),
}

/// One random `(F, I, J)` draw checked against both adjunctions by counting
/// homomorphisms. `Err` carries a description of a violated law.
pub fn adjunction_case(r: &mut impl Rng) -> Result<Case, String> {
    use catql::instance::enumerate_homs;
    use catql::migrate::{delta, pi, sigma};
    use catql::Error;

    // sparse target attributes keep pi's attributes determined more often
    let shape = SchemaShape { int_attr: 0.4, str_attr: 0.1, ..SchemaShape::default() };
    let t = random_schema(r, "T", &shape);
    let Some(f) = random_mapping(r, "S", &t) else {
        return Ok(Case::Skipped("no mapping".into()));
    };
    let s = f.source().clone();
    let i = random_instance(r, &s, 3, 2);
    let j = random_instance(r, &t, 3, 2);
    let skip = |e: Error| -> Result<Case, String> {
        match e {
            Error::AttributeClash { .. } | Error::UndeterminedAttribute { .. } | Error::HomLimitExceeded(_) => {
                Ok(Case::Skipped(e.to_string()))
            }
            e => Err(format!("unexpected error: {e}")),
        }
    };
    let dj = match delta(&f, &j) {
        Ok(x) => x,
        Err(e) => return skip(e),
    };
    let counts = |a: &Instance, b: &Instance| enumerate_homs(a, b, HOM_LIMIT);

    match sigma(&f, &i, BOUND) {
        Ok(si) => {
            let (l, rr) = match (counts(&si, &j), counts(&i, &dj)) {
                (Ok(l), Ok(rr)) => (l, rr),
                (Err(e), _) | (_, Err(e)) => return skip(e),
            };
            if l != rr {
                return Err(format!("sigma -| delta: {l} != {rr}\nF = {f:?}\nI = {i:?}\nJ = {j:?}"));
            }
        }
        Err(e) => return skip(e),
    }
    match pi(&f, &i, BOUND) {
        Ok(pi_i) => {
            let (l, rr) = match (counts(&dj, &i), counts(&j, &pi_i)) {
                (Ok(l), Ok(rr)) => (l, rr),
                (Err(e), _) | (_, Err(e)) => return skip(e),
            };
            if l != rr {
                return Err(format!("delta -| pi: {l} != {rr}\nF = {f:?}\nI = {i:?}\nJ = {j:?}"));
            }
        }
        Err(e) => return skip(e),
    }
    Ok(Case::Checked)
}
