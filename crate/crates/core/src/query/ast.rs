use std::fmt;

use crate::error::Pos;
use crate::value::{escape, Value};

/// `var.step.step...`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathExpr {
    pub var: String,
    pub steps: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    Path(PathExpr),
    Lit(Value),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equality {
    pub lhs: Operand,
    pub rhs: Operand,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectItem {
    pub expr: PathExpr,
    pub alias: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub node: String,
    pub var: String,
}

/// A select-from-where query. `conditions` is a conjunction of groups, each
/// group a disjunction of equalities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub select: Vec<SelectItem>,
    pub from: Vec<Binding>,
    pub conditions: Vec<Vec<Equality>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemaItem {
    Node(String),
    Edge { name: String, source: String, target: String },
    Attribute { name: String, source: String, ty: String },
    Equation { lhs: Vec<String>, rhs: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry {
    Row(u64),
    Map(u64, Value),
}

/// `key = entries;` inside an instance block. Whether the key names a node,
/// edge or attribute is decided against the schema when the script runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub key: Vec<String>,
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AttrTarget {
    Path(Vec<String>),
    Const(Value),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MappingItem {
    Node { from: String, to: String },
    Edge { key: Vec<String>, image: Vec<String> },
    Attribute { key: Vec<String>, image: AttrTarget },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Delta { mapping: String, instance: String },
    Sigma { mapping: String, instance: String },
    Pi { mapping: String, instance: String },
    Union(Vec<String>),
    DisjointUnion(String, String),
    Relationalize(String),
    Query { instance: String, query: Query },
    Closure { instance: String, n: u64 },
    RelationClosure { relation: String, n: u64 },
    Op(String),
    Compose(String, String),
    Translate { isa: String, syn: String, n: u64 },
    LinkView { portal: String, relation: String, link: Vec<String>, name_attr: String },
    Retarget { portal: String, pairs: String, link: Vec<String>, name_attr: String },
    Sql { path: String, schema: Option<String> },
    /// Binary relation literal on the span schema.
    Relation(Vec<(String, String)>),
    /// Parent-function literal; names without an entry are their own parent.
    Function(Vec<(String, String)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Schema { name: String, items: Vec<SchemaItem> },
    Instance { name: String, schema: String, items: Vec<Assignment> },
    Mapping { name: String, source: String, target: String, items: Vec<MappingItem> },
    Let { name: String, expr: Expr },
    Show { name: String, format: Option<String> },
    Export { path: String, name: String },
}

#[derive(Clone, Debug)]
pub struct Decl {
    pub pos: Pos,
    pub kind: DeclKind,
}

impl PartialEq for Decl {
    fn eq(&self, other: &Decl) -> bool {
        self.kind == other.kind
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Script {
    pub decls: Vec<Decl>,
}

fn dotted(names: &[String]) -> String {
    names.join(".")
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", escape(s))
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.var)?;
        for s in &self.steps {
            write!(f, ".{s}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Path(p) => p.fmt(f),
            Operand::Lit(v) => v.fmt(f),
        }
    }
}

impl fmt::Display for Equality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sel: Vec<String> = self.select.iter().map(|s| format!("{} as {}", s.expr, s.alias)).collect();
        let from: Vec<String> = self.from.iter().map(|b| format!("{} as {}", b.node, b.var)).collect();
        write!(f, "select {} from {}", sel.join(", "), from.join(", "))?;
        if !self.conditions.is_empty() {
            let groups: Vec<String> = self
                .conditions
                .iter()
                .map(|g| {
                    let alts: Vec<String> = g.iter().map(|e| e.to_string()).collect();
                    if alts.len() == 1 {
                        alts[0].clone()
                    } else {
                        format!("({})", alts.join(" or "))
                    }
                })
                .collect();
            write!(f, " where {}", groups.join(" and "))?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Delta { mapping, instance } => write!(f, "delta {mapping} {instance}"),
            Expr::Sigma { mapping, instance } => write!(f, "sigma {mapping} {instance}"),
            Expr::Pi { mapping, instance } => write!(f, "pi {mapping} {instance}"),
            Expr::Union(names) => write!(f, "union {}", names.join(" ")),
            Expr::DisjointUnion(a, b) => write!(f, "disjoint_union {a} {b}"),
            Expr::Relationalize(a) => write!(f, "relationalize {a}"),
            Expr::Query { instance, query } => write!(f, "query {instance} {{ {query} }}"),
            Expr::Closure { instance, n } => write!(f, "closure {instance} {n}"),
            Expr::RelationClosure { relation, n } => write!(f, "relation_closure {relation} {n}"),
            Expr::Op(r) => write!(f, "op {r}"),
            Expr::Compose(a, b) => write!(f, "compose {a} {b}"),
            Expr::Translate { isa, syn, n } => write!(f, "translate {isa} {syn} {n}"),
            Expr::LinkView { portal, relation, link, name_attr } => {
                write!(f, "link_view {portal} {relation} {} {name_attr}", dotted(link))
            }
            Expr::Retarget { portal, pairs, link, name_attr } => {
                write!(f, "retarget {portal} {pairs} {} {name_attr}", dotted(link))
            }
            Expr::Relation(pairs) | Expr::Function(pairs) => {
                let kw = if matches!(self, Expr::Relation(_)) { "relation" } else { "function" };
                let items: Vec<String> = pairs.iter().map(|(a, b)| format!("{} -> {}", quoted(a), quoted(b))).collect();
                write!(f, "{kw} {{ {} }}", items.join(", "))
            }
            Expr::Sql { path, schema } => {
                write!(f, "sql {}", quoted(path))?;
                if let Some(s) = schema {
                    write!(f, " as {s}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DeclKind::Schema { name, items } => {
                writeln!(f, "schema {name} {{")?;
                for item in items {
                    match item {
                        SchemaItem::Node(n) => writeln!(f, "  node {n};")?,
                        SchemaItem::Edge { name, source, target } => {
                            writeln!(f, "  edge {name} : {source} -> {target};")?
                        }
                        SchemaItem::Attribute { name, source, ty } => {
                            writeln!(f, "  attribute {name} : {source} -> {ty};")?
                        }
                        SchemaItem::Equation { lhs, rhs } => {
                            writeln!(f, "  equation {} = {};", dotted(lhs), dotted(rhs))?
                        }
                    }
                }
                write!(f, "}}")
            }
            DeclKind::Instance { name, schema, items } => {
                writeln!(f, "instance {name} : {schema} {{")?;
                for a in items {
                    let entries: Vec<String> = a
                        .entries
                        .iter()
                        .map(|e| match e {
                            Entry::Row(r) => r.to_string(),
                            Entry::Map(r, v) => format!("{r} -> {v}"),
                        })
                        .collect();
                    writeln!(f, "  {} = {};", dotted(&a.key), entries.join(", "))?;
                }
                write!(f, "}}")
            }
            DeclKind::Mapping { name, source, target, items } => {
                writeln!(f, "mapping {name} : {source} -> {target} {{")?;
                for item in items {
                    match item {
                        MappingItem::Node { from, to } => writeln!(f, "  node {from} -> {to};")?,
                        MappingItem::Edge { key, image } => {
                            writeln!(f, "  edge {} -> {};", dotted(key), dotted(image))?
                        }
                        MappingItem::Attribute { key, image } => match image {
                            AttrTarget::Path(p) => writeln!(f, "  attribute {} -> {};", dotted(key), dotted(p))?,
                            AttrTarget::Const(v) => writeln!(f, "  attribute {} -> {v};", dotted(key))?,
                        },
                    }
                }
                write!(f, "}}")
            }
            DeclKind::Let { name, expr } => write!(f, "let {name} = {expr};"),
            DeclKind::Show { name, format: None } => write!(f, "show {name};"),
            DeclKind::Show { name, format: Some(fmt) } => write!(f, "show {name} {fmt};"),
            DeclKind::Export { path, name } => write!(f, "export {} {name};", quoted(path)),
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}
