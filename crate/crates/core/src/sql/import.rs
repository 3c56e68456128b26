use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::lexer::{lex, Tok};
use crate::error::{Error, Pos, Result};
use crate::instance::{Instance, RowId};
use crate::kernel::{BaseType, Schema};
use crate::value::Value;

/// Foreign-key sidecar: `{table: {column: target_table}}`.
pub type FkSpec = BTreeMap<String, BTreeMap<String, String>>;

pub fn parse_fk_spec(json: &str) -> Result<FkSpec> {
    serde_json::from_str(json).map_err(|e| Error::SqlImport(format!("bad fk spec: {e}")))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SqlType {
    Int,
    Varchar(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqlColumn {
    pub name: String,
    pub ty: SqlType,
    pub primary_key: bool,
    pub references: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqlTableDef {
    pub name: String,
    pub columns: Vec<SqlColumn>,
}

#[derive(Clone, Debug)]
pub struct ImportOptions {
    pub schema_name: String,
    pub fk_spec: Option<FkSpec>,
    /// Treat `X_Table_id` columns as foreign keys into `table` when such a
    /// table exists and nothing else says otherwise.
    pub infer_id_columns: bool,
}

impl Default for ImportOptions {
    fn default() -> Self {
        ImportOptions { schema_name: "sql".into(), fk_spec: None, infer_id_columns: false }
    }
}

enum Stmt {
    Create(SqlTableDef, Pos),
    Insert { table: String, tuples: Vec<(Vec<Value>, Pos)>, pos: Pos },
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, wanted: &str) -> Result<T> {
        Err(Error::SqlSyntax { pos: self.pos(), message: format!("expected {wanted}, found {}", self.peek().describe()) })
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.is_kw(kw);
        if hit {
            self.bump();
        }
        hit
    }

    fn kw(&mut self, kw: &str) -> Result<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.fail(&format!("`{}`", kw.to_uppercase()))
        }
    }

    fn tok(&mut self, t: Tok) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(&t.describe())
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.bump() {
            Tok::Ident(s) => Ok(s),
            _ => {
                self.at -= 1;
                self.fail("a name")
            }
        }
    }

    fn column(&mut self) -> Result<SqlColumn> {
        let name = self.ident()?;
        let ty = if self.eat_kw("int") || self.eat_kw("integer") {
            SqlType::Int
        } else if self.eat_kw("varchar") {
            self.tok(Tok::LParen)?;
            let n = match self.bump() {
                Tok::Int(n) if n > 0 && n <= u32::MAX as i64 => n as u32,
                _ => {
                    self.at -= 1;
                    return self.fail("a positive length");
                }
            };
            self.tok(Tok::RParen)?;
            SqlType::Varchar(n)
        } else if let Tok::Ident(t) = self.peek() {
            return Err(Error::SqlUnsupported(format!("column type `{t}`")));
        } else {
            return self.fail("a column type");
        };
        let mut col = SqlColumn { name, ty, primary_key: false, references: None };
        loop {
            if self.eat_kw("primary") {
                self.kw("key")?;
                col.primary_key = true;
            } else if self.eat_kw("references") {
                col.references = Some(self.ident()?);
                if *self.peek() == Tok::LParen {
                    self.bump();
                    self.ident()?;
                    self.tok(Tok::RParen)?;
                }
            } else if let Tok::Ident(t) = self.peek() {
                return Err(Error::SqlUnsupported(format!("column constraint `{t}`")));
            } else {
                return Ok(col);
            }
        }
    }

    fn value(&mut self) -> Result<Value> {
        match self.bump() {
            Tok::Str(s) => Ok(Value::Str(s)),
            Tok::Int(i) => Ok(Value::Int(i)),
            Tok::Ident(s) if s.eq_ignore_ascii_case("null") => Ok(Value::Null(String::new())),
            _ => {
                self.at -= 1;
                self.fail("a literal")
            }
        }
    }

    fn statement(&mut self) -> Result<Stmt> {
        let pos = self.pos();
        if self.eat_kw("create") {
            self.kw("table")?;
            let name = self.ident()?;
            self.tok(Tok::LParen)?;
            let mut columns = vec![self.column()?];
            while *self.peek() == Tok::Comma {
                self.bump();
                if self.is_kw("primary") || self.is_kw("foreign") || self.is_kw("constraint") {
                    return Err(Error::SqlUnsupported("table-level constraints".into()));
                }
                columns.push(self.column()?);
            }
            self.tok(Tok::RParen)?;
            self.tok(Tok::Semi)?;
            Ok(Stmt::Create(SqlTableDef { name, columns }, pos))
        } else if self.eat_kw("insert") {
            self.kw("into")?;
            let table = self.ident()?;
            if *self.peek() == Tok::LParen {
                return Err(Error::SqlUnsupported("column list in INSERT".into()));
            }
            self.kw("values")?;
            let mut tuples = Vec::new();
            loop {
                let tpos = self.pos();
                self.tok(Tok::LParen)?;
                let mut vals = vec![self.value()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    vals.push(self.value()?);
                }
                self.tok(Tok::RParen)?;
                tuples.push((vals, tpos));
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
            self.tok(Tok::Semi)?;
            Ok(Stmt::Insert { table, tuples, pos })
        } else if let Tok::Ident(s) = self.peek() {
            Err(Error::SqlUnsupported(format!("statement `{}`", s.to_uppercase())))
        } else {
            self.fail("CREATE TABLE or INSERT INTO")
        }
    }
}

fn import_err<T>(pos: Pos, msg: String) -> Result<T> {
    Err(Error::SqlImport(format!("{pos}: {msg}")))
}

/// Column roles after resolving REFERENCES, the sidecar and inference.
fn resolve_roles(
    tables: &BTreeMap<String, (SqlTableDef, Pos)>,
    opts: &ImportOptions,
) -> Result<BTreeMap<String, Vec<Option<String>>>> {
    if let Some(spec) = &opts.fk_spec {
        for (t, cols) in spec {
            let Some((def, _)) = tables.get(t) else {
                return Err(Error::SqlImport(format!("fk spec names unknown table `{t}`")));
            };
            for c in cols.keys() {
                if !def.columns.iter().any(|x| &x.name == c) {
                    return Err(Error::SqlImport(format!("fk spec names unknown column `{t}.{c}`")));
                }
            }
        }
    }
    let lower: HashMap<String, &str> = tables.keys().map(|k| (k.to_lowercase(), k.as_str())).collect();
    let mut roles = BTreeMap::new();
    for (name, (def, pos)) in tables {
        let mut r = Vec::new();
        for (k, col) in def.columns.iter().enumerate() {
            if k == 0 {
                r.push(None);
                continue;
            }
            let spec = opts.fk_spec.as_ref().and_then(|s| s.get(name)).and_then(|c| c.get(&col.name)).cloned();
            let inferred = || {
                let stem = col.name.strip_suffix("_id").or_else(|| col.name.strip_suffix("_ID"))?;
                let last = stem.rsplit('_').next()?;
                lower.get(&last.to_lowercase()).map(|s| s.to_string())
            };
            let target = col.references.clone().or(spec).or_else(|| if opts.infer_id_columns { inferred() } else { None });
            if let Some(t) = &target {
                if !tables.contains_key(t) {
                    return import_err(*pos, format!("`{name}.{}` references unknown table `{t}`", col.name));
                }
                if col.ty != SqlType::Int {
                    return import_err(*pos, format!("foreign key `{name}.{}` must be INT", col.name));
                }
            }
            r.push(target);
        }
        roles.insert(name.clone(), r);
    }
    Ok(roles)
}

/// Parses a dialect script into a schema (one node per table, one edge per
/// foreign key, one attribute per other non-key column) and an instance whose
/// row ids are the primary-key values. SQL `NULL` in an attribute column
/// becomes a labelled null `table.column@id`.
pub fn import_sql(text: &str, opts: &ImportOptions) -> Result<(Arc<Schema>, Instance)> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let mut tables: BTreeMap<String, (SqlTableDef, Pos)> = BTreeMap::new();
    let mut inserts = Vec::new();
    while *p.peek() != Tok::Eof {
        match p.statement()? {
            Stmt::Create(def, pos) => {
                if tables.contains_key(&def.name) {
                    return import_err(pos, format!("table `{}` is defined twice", def.name));
                }
                let first = &def.columns[0];
                if !first.primary_key || first.ty != SqlType::Int || first.references.is_some() {
                    return import_err(pos, format!("first column of `{}` must be an INT PRIMARY KEY", def.name));
                }
                if def.columns.iter().filter(|c| c.primary_key).count() != 1 {
                    return import_err(pos, format!("`{}` must have exactly one primary key", def.name));
                }
                let mut seen = BTreeSet::new();
                for c in &def.columns {
                    if !seen.insert(c.name.as_str()) {
                        return import_err(pos, format!("duplicate column `{}.{}`", def.name, c.name));
                    }
                }
                tables.insert(def.name.clone(), (def, pos));
            }
            Stmt::Insert { table, tuples, pos } => inserts.push((table, tuples, pos)),
        }
    }
    let roles = resolve_roles(&tables, opts)?;

    let mut sb = Schema::builder(opts.schema_name.clone());
    for (name, (def, _)) in &tables {
        sb = sb.node(name.clone());
        for (col, role) in def.columns.iter().zip(&roles[name]).skip(1) {
            sb = match (role, &col.ty) {
                (Some(t), _) => sb.edge(col.name.clone(), name.clone(), t.clone()),
                (None, SqlType::Int) => sb.attribute(col.name.clone(), name.clone(), BaseType::Integer),
                (None, SqlType::Varchar(_)) => sb.attribute(col.name.clone(), name.clone(), BaseType::String),
            };
        }
    }
    let schema = Arc::new(sb.build()?);

    let mut b = Instance::builder(schema.clone());
    let mut pending = Vec::new();
    for (table, tuples, pos) in inserts {
        let Some((def, _)) = tables.get(&table) else {
            return import_err(pos, format!("INSERT into unknown table `{table}`"));
        };
        for (vals, tpos) in tuples {
            if vals.len() != def.columns.len() {
                return import_err(tpos, format!("`{table}` has {} columns, tuple has {}", def.columns.len(), vals.len()));
            }
            let id = match vals[0] {
                Value::Int(i) if i >= 0 => RowId(i as u64),
                _ => return import_err(tpos, format!("primary key of `{table}` must be a non-negative integer")),
            };
            if !b.add_row(&table, id)? {
                return import_err(tpos, format!("duplicate primary key {id} in `{table}`"));
            }
            for ((col, role), v) in def.columns.iter().zip(&roles[&table]).zip(vals).skip(1) {
                match (role, v) {
                    (Some(target), Value::Int(t)) if t >= 0 => {
                        pending.push((table.clone(), col.name.clone(), id, target.clone(), RowId(t as u64), tpos))
                    }
                    (Some(_), _) => {
                        return import_err(tpos, format!("foreign key `{table}.{}` needs a non-negative integer", col.name))
                    }
                    (None, Value::Null(_)) => {
                        b.set_attr(&table, &col.name, id, Value::Null(format!("{table}.{}@{id}", col.name)))?
                    }
                    (None, v) => {
                        let ok = matches!((&col.ty, &v), (SqlType::Int, Value::Int(_)) | (SqlType::Varchar(_), Value::Str(_)));
                        if !ok {
                            return import_err(tpos, format!("type mismatch for `{table}.{}`: {v}", col.name));
                        }
                        b.set_attr(&table, &col.name, id, v)?
                    }
                }
            }
        }
    }
    for (table, col, id, target, to, pos) in pending {
        if !b.has_row(&target, to) {
            return import_err(pos, format!("`{table}.{col}` = {to} has no matching row in `{target}`"));
        }
        b.set_edge(&table, &col, id, to)?;
    }
    Ok((schema, b.build()?))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const FIG2: &str = r#"CREATE TABLE unitcode (
  id INT PRIMARY KEY, Code VARCHAR(255), Description VARCHAR(255)
);
INSERT INTO unitcode VALUES 
(1,"EA","Each part/piece count"),
(2,"Thousands","1000 parts/pieces count"),
(3,"Inch","Length measure in inches"),
(4,"mm","Length measure in millimeters"),
(5,"cm","Length measure in centimeters"); 
"#;

    #[test]
    fn imports_unitcode_snippet() {
        let (s, i) = import_sql(FIG2, &ImportOptions::default()).unwrap();
        assert!(s.attribute("unitcode", "Code").is_some());
        assert_eq!(i.row_count("unitcode"), 5);
        assert_eq!(i.attr("unitcode", "Code", RowId(5)), Some(&Value::str("cm")));
        assert_eq!(i.attr("unitcode", "Description", RowId(1)), Some(&Value::str("Each part/piece count")));
    }

    const TWO: &str = "create table a (id int primary key, n varchar(9));
        create table b (id int primary key, a_id int, k int);
        insert into a values (1, 'x'), (2, NULL);
        insert into b values (10, 1, 5), (11, 2, -3);";

    #[test]
    fn sidecar_and_inference_make_edges() {
        let (s, _) = import_sql(TWO, &ImportOptions::default()).unwrap();
        assert!(s.attribute("b", "a_id").is_some());
        let spec = parse_fk_spec(r#"{"b": {"a_id": "a"}}"#).unwrap();
        let (s, i) = import_sql(TWO, &ImportOptions { fk_spec: Some(spec), ..Default::default() }).unwrap();
        assert!(s.edge("b", "a_id").is_some());
        assert_eq!(i.edge("b", "a_id", RowId(11)), Some(RowId(2)));
        assert_eq!(i.attr("a", "n", RowId(2)), Some(&Value::Null("a.n@2".into())));
        let (s, _) = import_sql(TWO, &ImportOptions { infer_id_columns: true, ..Default::default() }).unwrap();
        assert!(s.edge("b", "a_id").is_some());
    }

    #[test]
    fn integrity_errors() {
        let dangling = "create table a (id int primary key);
            create table b (id int primary key, r int references a);
            insert into b values (1, 7);";
        assert!(matches!(import_sql(dangling, &ImportOptions::default()), Err(Error::SqlImport(_))));
        let dup = "create table a (id int primary key); insert into a values (1), (1);";
        assert!(import_sql(dup, &ImportOptions::default()).is_err());
        let ty = "create table a (id int primary key, n int); insert into a values (1, 'x');";
        assert!(import_sql(ty, &ImportOptions::default()).is_err());
        assert!(matches!(import_sql("drop table a;", &ImportOptions::default()), Err(Error::SqlUnsupported(_))));
        let empty = "create table a (id int primary key);";
        assert_eq!(import_sql(empty, &ImportOptions::default()).unwrap().1.row_count("a"), 0);
    }

    #[test]
    fn syntax_error_position() {
        match import_sql("create table a (\n id int primary key,\n );", &ImportOptions::default()) {
            Err(Error::SqlSyntax { pos, .. }) => assert_eq!(pos.line, 3),
            other => panic!("{other:?}"),
        }
    }
}
