//! Enrichment of a database by a translated is-a relation.
//!
//! For every edge `e : X -> N` into the target node `N`, each row `x` of `X`
//! whose `e`-target is named `a` gets a copy retargeted at the `N` row named
//! `b`, for every pair `(a, b)` of the relation. `N` rows named `b` are created
//! when missing. The steps are written out as a script so the transformation
//! can be inspected and replayed.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::relation::relation_pairs;
use crate::error::{Error, Result};
use crate::instance::{Instance, InstanceBuilder, RowId};
use crate::kernel::{BaseType, Schema};
use crate::query::{parse_script, run_script_in, Env, EnvEntry, RunConfig, RESULT_NODE};
use crate::value::Value;

pub const PORTAL: &str = "portal";
pub const ISA_PRIME: &str = "isa_prime";
pub const ENRICHED: &str = "enriched";

fn view_schema() -> Arc<Schema> {
    Arc::new(
        Schema::builder("view")
            .node("link")
            .node("isa")
            .attribute("id", "link", BaseType::Integer)
            .attribute("target", "link", BaseType::String)
            .attribute("left", "isa", BaseType::String)
            .attribute("right", "isa", BaseType::String)
            .build()
            .expect("view schema is well formed"),
    )
}

fn link_target(portal: &Instance, node: &str, edge: &str, name_attr: &str) -> Result<String> {
    let s = portal.schema();
    let e = s
        .edge(node, edge)
        .ok_or_else(|| Error::UnknownStep { node: node.to_owned(), name: edge.to_owned() })?;
    match s.attribute(&e.target, name_attr) {
        Some(a) if a.ty == BaseType::String => Ok(e.target.clone()),
        _ => Err(Error::Enrichment(format!("`{}` has no string attribute `{name_attr}`", e.target))),
    }
}

/// Flat view joining link rows to the names they point at, next to the
/// relation's name pairs.
pub fn link_view(portal: &Instance, relation: &Instance, node: &str, edge: &str, name_attr: &str) -> Result<Instance> {
    let target = link_target(portal, node, edge, name_attr)?;
    let mut b = Instance::builder(view_schema());
    for x in portal.rows(node) {
        let t = portal.edge(node, edge, x).ok_or_else(|| Error::Internal("edge undefined".into()))?;
        let name = portal.attr(&target, name_attr, t).cloned().ok_or_else(|| Error::Internal("name undefined".into()))?;
        let id = i64::try_from(x.0).map_err(|_| Error::Enrichment(format!("row id {x} too large")))?;
        b.add_row("link", x)?;
        b.set_attr("link", "id", x, Value::Int(id))?;
        b.set_attr("link", "target", x, name)?;
    }
    for (k, (l, r)) in relation_pairs(relation)?.into_iter().enumerate() {
        let row = RowId(k as u64);
        b.add_row("isa", row)?;
        b.set_attr("isa", "left", row, l)?;
        b.set_attr("isa", "right", row, r)?;
    }
    b.build()
}

/// Copies each link row named in `pairs` (a query result with attributes
/// `id` and `target`) with its edge retargeted at the row of that name,
/// creating target rows as needed. Returns the grown instance and notes on
/// created rows.
pub fn retarget(
    portal: &Instance,
    pairs: &Instance,
    node: &str,
    edge: &str,
    name_attr: &str,
) -> Result<(Instance, Vec<String>)> {
    let target = link_target(portal, node, edge, name_attr)?;
    let s = portal.schema().clone();
    let want: BTreeSet<&str> = ["id", "target"].into();
    let got: BTreeSet<&str> = pairs.schema().attributes_of(RESULT_NODE).map(|a| a.name.as_str()).collect();
    if got != want {
        return Err(Error::Enrichment("retarget expects a query result with columns `id` and `target`".into()));
    }
    let mut jobs: Vec<(RowId, Value)> = Vec::new();
    for r in pairs.rows(RESULT_NODE) {
        let id = match pairs.attr(RESULT_NODE, "id", r) {
            Some(Value::Int(i)) if *i >= 0 => RowId(*i as u64),
            other => return Err(Error::Enrichment(format!("bad link id {other:?}"))),
        };
        if !portal.has_row(node, id) {
            return Err(Error::Enrichment(format!("no row {id} in `{node}`")));
        }
        let name = pairs.attr(RESULT_NODE, "target", r).cloned().unwrap_or(Value::Null(String::new()));
        jobs.push((id, name));
    }
    jobs.sort();

    let mut by_name: BTreeMap<Value, RowId> = BTreeMap::new();
    for t in portal.rows(&target) {
        if let Some(v) = portal.attr(&target, name_attr, t) {
            by_name.entry(v.clone()).or_insert(t);
        }
    }
    let current = |x: RowId| portal.edge(node, edge, x).expect("validated instance");

    // Rows to create, with the existing rows they are derived from.
    let mut sources: BTreeMap<Value, BTreeSet<RowId>> = BTreeMap::new();
    for (x, name) in &jobs {
        if !by_name.contains_key(name) {
            sources.entry(name.clone()).or_default().insert(current(*x));
        }
    }

    let mut b = InstanceBuilder::from(portal.clone());
    let mut notes = Vec::new();
    let mut next_target = portal.fresh_row(&target).0;
    for (name, srcs) in &sources {
        let row = RowId(next_target);
        next_target += 1;
        b.add_row(&target, row)?;
        let mut nulls = Vec::new();
        for a in s.attributes_of(&target) {
            let v = if a.name == name_attr {
                name.clone()
            } else {
                let vals: BTreeSet<&Value> = srcs.iter().filter_map(|t| portal.attr(&target, &a.name, *t)).collect();
                match vals.into_iter().collect::<Vec<_>>().as_slice() {
                    [one] => (*one).clone(),
                    _ => {
                        nulls.push(a.name.clone());
                        Value::Null(format!("{target}.{}@{}", a.name, crate::render::cell(name)))
                    }
                }
            };
            b.set_attr(&target, &a.name, row, v)?;
        }
        let first = *srcs.iter().next().expect("nonempty");
        for e in s.edges_from(&target) {
            let y = portal.edge(&target, &e.name, first).expect("validated instance");
            b.set_edge(&target, &e.name, row, y)?;
        }
        let mut note = format!("created `{target}` row {} for {}", row, crate::render::cell(name));
        if !nulls.is_empty() {
            note.push_str(&format!(" with labelled nulls in {}", nulls.join(", ")));
        }
        notes.push(note);
        by_name.insert(name.clone(), row);
    }

    let mut next_link = portal.fresh_row(node).0;
    for (x, name) in &jobs {
        let to = by_name[name];
        if to == current(*x) {
            continue;
        }
        let y = RowId(next_link);
        next_link += 1;
        b.add_row(node, y)?;
        for e in s.edges_from(node) {
            let t = if e.name == edge { to } else { portal.edge(node, &e.name, *x).expect("validated instance") };
            b.set_edge(node, &e.name, y, t)?;
        }
        for a in s.attributes_of(node) {
            b.set_attr(node, &a.name, y, portal.attr(node, &a.name, *x).cloned().expect("validated instance"))?;
        }
    }
    Ok((b.build()?, notes))
}

fn script_name(s: &str) -> Result<&str> {
    let ok = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        && !s.ends_with('-');
    if ok {
        Ok(s)
    } else {
        Err(Error::Enrichment(format!("name `{s}` cannot be written in a script")))
    }
}

/// Script text enriching the instance bound to `portal` with the relation
/// bound to `isa_prime`; the result is bound to `enriched`.
pub fn generate_enrichment(s: &Schema, target: &str, name_attr: &str) -> Result<String> {
    match s.attribute(target, name_attr) {
        Some(a) if a.ty == BaseType::String => {}
        _ => return Err(Error::Enrichment(format!("`{target}` has no string attribute `{name_attr}`"))),
    }
    // Steps are tagged by the linking node, plus the edge when a node links
    // to the target more than once.
    let mut links: Vec<(&str, &str)> =
        s.edges().filter(|e| e.target == target).map(|e| (e.source.as_str(), e.name.as_str())).collect();
    links.sort();
    let mut out = format!("# enrichment along is-a pairs on {target}.{name_attr}\n");
    let mut results = vec![PORTAL.to_owned()];
    for &(node, edge) in &links {
        let (node, edge, attr) = (script_name(node)?, script_name(edge)?, script_name(name_attr)?);
        let shared = links.iter().filter(|(n, _)| *n == node).count() > 1;
        let tag = if shared { format!("{node}_{edge}") } else { node.to_owned() };
        out.push_str(&format!(
            "\nlet view_{tag} = link_view {PORTAL} {ISA_PRIME} {node}.{edge} {attr};\n\
             let pairs_{tag} = query view_{tag} {{\n  \
             select l.id as id, p.right as target\n  \
             from link as l, isa as p\n  \
             where l.target = p.left\n}};\n\
             let new_{tag} = retarget {PORTAL} pairs_{tag} {node}.{edge} {attr};\n"
        ));
        results.push(format!("new_{tag}"));
    }
    out.push_str(&format!("\nlet {ENRICHED} = union {};\n", results.join(" ")));
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Enriched {
    pub instance: Instance,
    pub script: String,
    pub notes: Vec<String>,
}

pub fn enrich(portal: &Instance, isa_prime: &Instance, target: &str, name_attr: &str, cfg: &RunConfig) -> Result<Enriched> {
    let script = generate_enrichment(portal.schema(), target, name_attr)?;
    let ast = parse_script(&script)?;
    let mut env = Env::new();
    env.define(PORTAL, EnvEntry::Instance(portal.clone()))?;
    env.define(ISA_PRIME, EnvEntry::Instance(isa_prime.clone()))?;
    let env = run_script_in(&ast, cfg, env)?;
    let instance = env.instance(ENRICHED)?.clone();
    Ok(Enriched { instance, script, notes: env.warnings })
}
