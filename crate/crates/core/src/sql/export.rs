use std::fmt::Write as _;

use crate::instance::Instance;
use crate::value::Value;

#[derive(Clone, Debug)]
pub struct Exported {
    pub text: String,
    pub warnings: Vec<String>,
}

fn ident(s: &str) -> String {
    let plain = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        s.to_owned()
    } else {
        format!("`{}`", s.replace('`', "``"))
    }
}

fn literal(v: &Value) -> String {
    match v {
        Value::Str(s) => format!("'{}'", s.replace('\'', "''")),
        Value::Int(i) => i.to_string(),
        Value::Null(_) => "NULL".into(),
    }
}

/// Writes `CREATE TABLE` and `INSERT INTO` statements for every node, tables
/// in name order and rows in id order. Labelled nulls become `NULL`; each
/// affected cell is listed in the warnings.
pub fn export_sql(inst: &Instance) -> Exported {
    let s = inst.schema();
    let mut text = String::new();
    let mut warnings = Vec::new();
    if !s.equations().is_empty() {
        warnings.push(format!("{} path equation(s) are not expressible in SQL and were dropped", s.equations().len()));
    }
    for node in s.nodes() {
        let edges: Vec<_> = s.edges_from(node).collect();
        let attrs: Vec<_> = s.attributes_of(node).collect();
        let mut key = "id".to_owned();
        while edges.iter().any(|e| e.name == key) || attrs.iter().any(|a| a.name == key) {
            key.push('_');
        }
        let mut cols = vec![format!("  {} INT PRIMARY KEY", ident(&key))];
        for e in &edges {
            cols.push(format!("  {} INT REFERENCES {}", ident(&e.name), ident(&e.target)));
        }
        for a in &attrs {
            let ty = match a.ty {
                crate::kernel::BaseType::Integer => "INT",
                crate::kernel::BaseType::String => "VARCHAR(255)",
            };
            cols.push(format!("  {} {ty}", ident(&a.name)));
        }
        let _ = writeln!(text, "CREATE TABLE {} (\n{}\n);", ident(node), cols.join(",\n"));
        let mut tuples = Vec::new();
        for r in inst.rows(node) {
            let mut vals = vec![r.0.to_string()];
            for e in &edges {
                vals.push(inst.edge(node, &e.name, r).map_or("NULL".into(), |t| t.0.to_string()));
            }
            for a in &attrs {
                let v = inst.attr(node, &a.name, r).cloned().unwrap_or(Value::Null(String::new()));
                if let Value::Null(l) = &v {
                    warnings.push(format!("{node}.{} row {r}: labelled null `{l}` exported as NULL", a.name));
                }
                vals.push(literal(&v));
            }
            tuples.push(format!("({})", vals.join(", ")));
        }
        if !tuples.is_empty() {
            let _ = writeln!(text, "INSERT INTO {} VALUES\n{};", ident(node), tuples.join(",\n"));
        }
    }
    Exported { text, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::iso_check;
    use crate::sql::import::tests::FIG2;
    use crate::sql::{import_sql, ImportOptions};

    #[test]
    fn unitcode_round_trip() {
        let (_, i) = import_sql(FIG2, &ImportOptions::default()).unwrap();
        let out = export_sql(&i);
        assert!(out.warnings.is_empty());
        assert!(out.text.contains("(5, 'cm', 'Length measure in centimeters')"), "{}", out.text);
        let (_, j) = import_sql(&out.text, &ImportOptions::default()).unwrap();
        assert!(iso_check(&i, &j));
    }

    #[test]
    fn empty_and_null_cells() {
        let src = "create table `is-a` (id int primary key, `it's` varchar(3), r int references `is-a`);";
        let (_, i) = import_sql(src, &ImportOptions::default()).unwrap();
        let out = export_sql(&i);
        assert!(!out.text.contains("INSERT"));
        let (_, j) = import_sql(&out.text, &ImportOptions::default()).unwrap();
        assert_eq!(i.schema(), j.schema());

        let (_, i) = import_sql(
            "create table t (id int primary key, s varchar(5)); insert into t values (1, NULL), (2, 'o''k');",
            &ImportOptions::default(),
        )
        .unwrap();
        let out = export_sql(&i);
        assert_eq!(out.warnings.len(), 1);
        assert!(out.text.contains("(1, NULL)") && out.text.contains("'o''k'"), "{}", out.text);
    }
}
