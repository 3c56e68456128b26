use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use super::ast::Entry as Entry_;
use super::ast::*;
use super::eval::eval_query_with;
use crate::enrich;
use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::instance::{disjoint_union, disjoint_union_all, relationalize_with, Instance};
use crate::kernel::{BaseType, Mapping, Schema, DEFAULT_PATH_BOUND};
use crate::migrate::{delta, pi_with, sigma};
use crate::render::{render, Format};
use crate::sql::{export_sql, import_sql, FkSpec, ImportOptions};
use crate::value::Value;
use crate::RowId;

/// A named value in a script environment.
#[derive(Clone, Debug)]
pub enum Entry {
    Schema(Arc<Schema>),
    Instance(Instance),
    Mapping(Mapping),
}

impl Entry {
    fn kind(&self) -> &'static str {
        match self {
            Entry::Schema(_) => "schema",
            Entry::Instance(_) => "instance",
            Entry::Mapping(_) => "mapping",
        }
    }
}

/// Text produced by a `show` directive.
#[derive(Clone, Debug)]
pub struct Output {
    pub name: String,
    pub format: Format,
    pub text: String,
}

#[derive(Clone, Debug, Default)]
pub struct Env {
    entries: BTreeMap<String, Entry>,
    order: Vec<String>,
    pub outputs: Vec<Output>,
    pub warnings: Vec<String>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn define(&mut self, name: &str, entry: Entry) -> Result<()> {
        if self.entries.contains_key(name) {
            return Err(Error::Redefinition(name.to_owned()));
        }
        self.entries.insert(name.to_owned(), entry);
        self.order.push(name.to_owned());
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Entry> {
        self.entries.get(name)
    }

    /// Names in definition order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    fn lookup(&self, name: &str) -> Result<&Entry> {
        self.entries.get(name).ok_or_else(|| Error::UnknownName(name.to_owned()))
    }

    pub fn instance(&self, name: &str) -> Result<&Instance> {
        match self.lookup(name)? {
            Entry::Instance(i) => Ok(i),
            e => Err(Error::WrongKind { name: name.to_owned(), expected: "instance", found: e.kind() }),
        }
    }

    pub fn mapping(&self, name: &str) -> Result<&Mapping> {
        match self.lookup(name)? {
            Entry::Mapping(m) => Ok(m),
            e => Err(Error::WrongKind { name: name.to_owned(), expected: "mapping", found: e.kind() }),
        }
    }

    /// A schema by name; an instance name stands for the instance's schema.
    pub fn schema(&self, name: &str) -> Result<Arc<Schema>> {
        match self.lookup(name)? {
            Entry::Schema(s) => Ok(s.clone()),
            Entry::Instance(i) => Ok(i.schema().clone()),
            e => Err(Error::WrongKind { name: name.to_owned(), expected: "schema", found: e.kind() }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub path_bound: usize,
    pub strategy: Strategy,
    /// Relative paths in `sql` and `export` resolve against this directory.
    pub base_dir: PathBuf,
    pub fk_spec: Option<FkSpec>,
    pub infer_id_columns: bool,
    /// Format for `show` directives that name none.
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            path_bound: DEFAULT_PATH_BOUND,
            strategy: Strategy::default(),
            base_dir: PathBuf::from("."),
            fk_spec: None,
            infer_id_columns: false,
            format: Format::Ascii,
        }
    }
}

pub fn run_script(script: &Script, cfg: &RunConfig) -> Result<Env> {
    run_script_in(script, cfg, Env::new())
}

/// Runs `script` on top of an environment that may already hold bindings.
pub fn run_script_in(script: &Script, cfg: &RunConfig, mut env: Env) -> Result<Env> {
    for d in &script.decls {
        run_decl(d, cfg, &mut env).map_err(|e| e.at(d.pos))?;
    }
    Ok(env)
}

fn run_decl(d: &Decl, cfg: &RunConfig, env: &mut Env) -> Result<()> {
    match &d.kind {
        DeclKind::Schema { name, items } => {
            let s = build_schema(name, items)?;
            env.define(name, Entry::Schema(Arc::new(s)))
        }
        DeclKind::Instance { name, schema, items } => {
            let s = env.schema(schema)?;
            let i = build_instance(s, items)?;
            env.define(name, Entry::Instance(i))
        }
        DeclKind::Mapping { name, source, target, items } => {
            let m = build_mapping(name, env.schema(source)?, env.schema(target)?, items, cfg.path_bound)?;
            env.define(name, Entry::Mapping(m))
        }
        DeclKind::Let { name, expr } => {
            if env.get(name).is_some() {
                return Err(Error::Redefinition(name.clone()));
            }
            let i = eval_expr(name, expr, cfg, env)?;
            env.define(name, Entry::Instance(i))
        }
        DeclKind::Show { name, format } => {
            let format = match format {
                Some(f) => f.parse()?,
                None => cfg.format,
            };
            let text = render(env.instance(name)?, format, None)?;
            env.outputs.push(Output { name: name.clone(), format, text });
            Ok(())
        }
        DeclKind::Export { path, name } => {
            let out = export_sql(env.instance(name)?);
            let full = cfg.base_dir.join(path);
            std::fs::write(&full, out.text).map_err(|source| Error::Io { path: full.display().to_string(), source })?;
            env.warnings.extend(out.warnings);
            Ok(())
        }
    }
}

fn build_schema(name: &str, items: &[SchemaItem]) -> Result<Schema> {
    let mut b = Schema::builder(name);
    for item in items {
        b = match item {
            SchemaItem::Node(n) => b.node(n.clone()),
            SchemaItem::Edge { name, source, target } => b.edge(name.clone(), source.clone(), target.clone()),
            SchemaItem::Attribute { name, source, ty } => b.attribute(name.clone(), source.clone(), ty.parse::<BaseType>()?),
            SchemaItem::Equation { lhs, rhs } => b.equation_dotted(lhs.join("."), rhs.join(".")),
        };
    }
    b.build()
}

fn build_instance(s: Arc<Schema>, items: &[Assignment]) -> Result<Instance> {
    let mut b = Instance::builder(s.clone());
    for a in items {
        match a.key.as_slice() {
            [node] => {
                for e in &a.entries {
                    match e {
                        Entry_::Row(r) => {
                            b.add_row(node, RowId(*r))?;
                        }
                        Entry_::Map(..) => {
                            return Err(Error::InvalidInstance(format!("`{node} = ...` lists row ids, not `id -> value`")))
                        }
                    }
                }
            }
            [node, name] => {
                let edge = s.edge(node, name).cloned();
                if edge.is_none() && s.attribute(node, name).is_none() {
                    return Err(Error::UnknownStep { node: node.clone(), name: name.clone() });
                }
                for e in &a.entries {
                    let Entry_::Map(r, v) = e else {
                        return Err(Error::InvalidInstance(format!("`{node}.{name}` entries must be `id -> value`")));
                    };
                    let r = RowId(*r);
                    b.add_row(node, r)?;
                    match (&edge, v) {
                        (Some(edge), Value::Int(t)) if *t >= 0 => {
                            b.add_row(&edge.target, RowId(*t as u64))?;
                            b.set_edge(node, name, r, RowId(*t as u64))?;
                        }
                        (Some(_), _) => {
                            return Err(Error::InvalidInstance(format!("`{node}.{name}` is an edge; its values are row ids")))
                        }
                        (None, v) => b.set_attr(node, name, r, v.clone())?,
                    }
                }
            }
            _ => return Err(Error::InvalidInstance(format!("cannot assign to `{}`", a.key.join(".")))),
        }
    }
    b.build()
}

fn build_mapping(name: &str, src: Arc<Schema>, tgt: Arc<Schema>, items: &[MappingItem], bound: usize) -> Result<Mapping> {
    let mut b = Mapping::builder(name, src, tgt).bound(bound);
    let key2 = |k: &[String]| -> Result<(String, String)> {
        match k {
            [n, e] => Ok((n.clone(), e.clone())),
            _ => Err(Error::InvalidMapping { mapping: name.to_owned(), reason: format!("expected `Node.name`, found `{}`", k.join(".")) }),
        }
    };
    for item in items {
        b = match item {
            MappingItem::Node { from, to } => b.node(from, to),
            MappingItem::Edge { key, image } => {
                let (n, e) = key2(key)?;
                b.edge_dotted(&n, &e, &image.join("."))?
            }
            MappingItem::Attribute { key, image: AttrTarget::Path(p) } => {
                let (n, a) = key2(key)?;
                b.attribute_dotted(&n, &a, &p.join("."))?
            }
            MappingItem::Attribute { key, image: AttrTarget::Const(v) } => {
                let (n, a) = key2(key)?;
                b.attribute_const(&n, &a, v.clone())
            }
        };
    }
    b.build()
}

fn n_arg(n: u64) -> Result<usize> {
    usize::try_from(n).map_err(|_| Error::Query(format!("{n} is too large")))
}

/// Relationalize, noting nodes whose rows all merged for lack of attributes.
fn collapse_warned(name: &str, i: &Instance, cfg: &RunConfig, env: &mut Env) -> Instance {
    let r = relationalize_with(i, cfg.strategy);
    for n in &r.collapsed {
        env.warnings.push(format!("{name}: node `{n}` has no attributes; its rows collapsed to one"));
    }
    r.instance
}

fn eval_expr(name: &str, expr: &Expr, cfg: &RunConfig, env: &mut Env) -> Result<Instance> {
    let inst = |n: &str| env.instance(n).cloned();
    Ok(match expr {
        Expr::Delta { mapping, instance } => delta(env.mapping(mapping)?, env.instance(instance)?)?,
        Expr::Sigma { mapping, instance } => sigma(env.mapping(mapping)?, env.instance(instance)?, cfg.path_bound)?,
        Expr::Pi { mapping, instance } => pi_with(env.mapping(mapping)?, env.instance(instance)?, cfg.path_bound, cfg.strategy)?,
        Expr::Union(names) => {
            let parts = names.iter().map(|n| inst(n)).collect::<Result<Vec<_>>>()?;
            let refs: Vec<&Instance> = parts.iter().collect();
            collapse_warned(name, &disjoint_union_all(&refs)?, cfg, env)
        }
        Expr::DisjointUnion(a, b) => disjoint_union(env.instance(a)?, env.instance(b)?)?,
        Expr::Relationalize(a) => {
            let i = env.instance(a)?.clone();
            collapse_warned(name, &i, cfg, env)
        }
        Expr::Query { instance, query } => eval_query_with(query, env.instance(instance)?, cfg.strategy)?,
        Expr::Closure { instance, n } => enrich::transitive_closure_with(env.instance(instance)?, n_arg(*n)?, cfg.strategy)?,
        Expr::RelationClosure { relation, n } => {
            enrich::relation_closure_with(env.instance(relation)?, n_arg(*n)?, cfg.strategy)?
        }
        Expr::Op(r) => enrich::op_relation(env.instance(r)?)?,
        Expr::Compose(a, b) => enrich::compose_relations_with(env.instance(a)?, env.instance(b)?, cfg.strategy)?,
        Expr::Translate { isa, syn, n } => enrich::translate_isa(env.instance(isa)?, env.instance(syn)?, n_arg(*n)?)?,
        Expr::LinkView { portal, relation, link, name_attr } => {
            enrich::link_view(env.instance(portal)?, env.instance(relation)?, &link[0], &link[1], name_attr)?
        }
        Expr::Retarget { portal, pairs, link, name_attr } => {
            let (i, notes) = enrich::retarget(env.instance(portal)?, env.instance(pairs)?, &link[0], &link[1], name_attr)?;
            env.warnings.extend(notes.into_iter().map(|n| format!("{name}: {n}")));
            i
        }
        Expr::Sql { path, schema } => {
            let full = cfg.base_dir.join(path);
            let text = enrich::read(&full)?;
            let opts = ImportOptions {
                schema_name: schema.clone().unwrap_or_else(|| name.to_owned()),
                fk_spec: cfg.fk_spec.clone(),
                infer_id_columns: cfg.infer_id_columns,
            };
            let (s, i) = import_sql(&text, &opts)?;
            if let Some(sn) = schema {
                env.define(sn, Entry::Schema(s))?;
            }
            i
        }
        Expr::Relation(pairs) => enrich::relation_from_pairs(pairs),
        Expr::Function(pairs) => enrich::function_from_pairs(pairs)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_script;

    fn run(src: &str) -> Result<Env> {
        run_script(&parse_script(src).unwrap(), &RunConfig::default())
    }

    const BASE: &str = r#"
        schema S { node A, B; edge f : A -> B; attribute x : A -> string; attribute y : B -> integer; }
        instance I : S { A.f = 1 -> 10, 2 -> 10; A.x = 1 -> "p", 2 -> "q"; B.y = 10 -> 7; }
        schema T { node B; attribute y : B -> integer; }
        mapping F : T -> S { node B -> B; attribute B.y -> B.y; }
    "#;

    #[test]
    fn delta_binding() {
        let env = run(&format!("{BASE} let J = delta F I; show J;")).unwrap();
        assert_eq!(env.instance("J").unwrap().row_count("B"), 1);
        assert!(env.outputs[0].text.contains("| 7 |"), "{}", env.outputs[0].text);
    }

    #[test]
    fn resolution_errors_carry_position() {
        match run(&format!("{BASE}\nlet J = delta G I;")) {
            Err(Error::At { pos, source }) => {
                assert_eq!(pos.line, 7);
                assert!(matches!(*source, Error::UnknownName(ref n) if n == "G"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(run(&format!("{BASE} let I = delta F I;")), Err(Error::At { .. })));
        assert!(run(&format!("{BASE} let J = delta I I;")).is_err());
    }

    #[test]
    fn queries_and_relations() {
        let env = run(&format!(
            "{BASE} let Q = query I {{ select a.x as x, a.f.y as y from A as a }};
             let R = relation {{ \"a\" -> \"b\", \"b\" -> \"c\" }};
             let C = relation_closure R 3;
             let P = function {{ \"iron\" -> \"metal\", \"metal\" -> \"matter\" }};
             let K = closure P 3;"
        ))
        .unwrap();
        assert_eq!(env.instance("Q").unwrap().row_count("row"), 2);
        assert_eq!(env.instance("C").unwrap().row_count("is-a"), 6);
        assert_eq!(env.instance("K").unwrap().row_count("is-a"), 6);
    }
}
