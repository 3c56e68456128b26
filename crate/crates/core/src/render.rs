//! Text renderings of instances: aligned tables, CSV and JSON.
//!
//! Each node becomes one table. The `id` column is shown only when the
//! schema has edges, since row ids carry no information otherwise.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instance::{Instance, RowId};
use crate::value::Value;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Ascii,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "ascii" | "table" => Ok(Format::Ascii),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Render(format!("unknown format `{other}` (expected ascii, csv or json)"))),
        }
    }
}

/// Cell text for tables and CSV.
pub fn cell(v: &Value) -> String {
    match v {
        Value::Str(s) => s.clone(),
        Value::Int(i) => i.to_string(),
        Value::Null(l) => format!("null({l})"),
    }
}

struct Table {
    node: String,
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

enum Cell {
    Row(RowId),
    Value(Value),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Row(r) => r.to_string(),
            Cell::Value(v) => cell(v),
        }
    }
}

fn tables(inst: &Instance, only: Option<&str>) -> Result<Vec<Table>> {
    let s = inst.schema();
    if let Some(n) = only {
        if !s.has_node(n) {
            return Err(Error::UnknownNode(n.to_owned()));
        }
    }
    let with_ids = s.edges().next().is_some();
    let mut out = Vec::new();
    for node in s.nodes().filter(|n| only.map_or(true, |o| o == *n)) {
        let edges: Vec<&str> = s.edges_from(node).map(|e| e.name.as_str()).collect();
        let attrs: Vec<&str> = s.attributes_of(node).map(|a| a.name.as_str()).collect();
        let mut header: Vec<String> = Vec::new();
        if with_ids {
            header.push("id".into());
        }
        header.extend(edges.iter().chain(&attrs).map(|s| s.to_string()));
        let mut rows = Vec::new();
        for r in inst.rows(node) {
            let mut row = Vec::new();
            if with_ids {
                row.push(Cell::Row(r));
            }
            for e in &edges {
                let t = inst.edge(node, e, r).ok_or_else(|| Error::Render(format!("edge `{node}.{e}` undefined")))?;
                row.push(Cell::Row(t));
            }
            for a in &attrs {
                let v = inst.attr(node, a, r).ok_or_else(|| Error::Render(format!("attribute `{node}.{a}` undefined")))?;
                row.push(Cell::Value(v.clone()));
            }
            rows.push(row);
        }
        out.push(Table { node: node.to_owned(), header, rows });
    }
    Ok(out)
}

fn ascii(tables: &[Table]) -> String {
    let mut out = String::new();
    let many = tables.len() > 1;
    for (k, t) in tables.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        if many {
            let _ = writeln!(out, "{} ({} rows)", t.node, t.rows.len());
        }
        let cells: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(Cell::text).collect()).collect();
        let widths: Vec<usize> = (0..t.header.len())
            .map(|c| {
                cells
                    .iter()
                    .map(|r| r[c].chars().count())
                    .chain([t.header[c].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |vals: &[String]| {
            let padded: Vec<String> =
                vals.iter().zip(&widths).map(|(v, w)| format!("{v}{}", " ".repeat(w - v.chars().count()))).collect();
            format!("| {} |\n", padded.join(" | "))
        };
        let rule = format!("+{}+\n", widths.iter().map(|w| "-".repeat(w + 2)).collect::<Vec<_>>().join("+"));
        if t.header.is_empty() {
            let _ = writeln!(out, "({} rows, no columns)", t.rows.len());
            continue;
        }
        out.push_str(&rule);
        out.push_str(&line(&t.header));
        out.push_str(&rule);
        for r in &cells {
            out.push_str(&line(r));
        }
        out.push_str(&rule);
    }
    out
}

fn csv_text(tables: &[Table]) -> Result<String> {
    let mut out = String::new();
    let many = tables.len() > 1;
    for (k, t) in tables.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        if many {
            let _ = writeln!(out, "# {}", t.node);
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| Error::Render(e.to_string());
        w.write_record(&t.header).map_err(fail)?;
        for r in &t.rows {
            w.write_record(r.iter().map(Cell::text)).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Render(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Render(e.to_string()))?);
    }
    Ok(out)
}

pub fn value_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Str(s) => serde_json::Value::String(s.clone()),
        Value::Int(i) => serde_json::Value::from(*i),
        Value::Null(l) => serde_json::json!({ "null": l }),
    }
}

fn json(tables: &[Table]) -> Result<String> {
    let mut obj = serde_json::Map::new();
    for t in tables {
        let rows: Vec<serde_json::Value> = t
            .rows
            .iter()
            .map(|r| {
                let fields = t.header.iter().zip(r).map(|(h, c)| {
                    let v = match c {
                        Cell::Row(id) => serde_json::Value::from(id.0),
                        Cell::Value(v) => value_json(v),
                    };
                    (h.clone(), v)
                });
                serde_json::Value::Object(fields.collect())
            })
            .collect();
        obj.insert(t.node.clone(), serde_json::Value::Array(rows));
    }
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(obj)).map_err(|e| Error::Render(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Renders every node of `inst`, or just `node` when given.
pub fn render(inst: &Instance, format: Format, node: Option<&str>) -> Result<String> {
    let t = tables(inst, node)?;
    match format {
        Format::Ascii => Ok(ascii(&t)),
        Format::Csv => csv_text(&t),
        Format::Json => json(&t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::chain;

    #[test]
    fn ascii_is_aligned() {
        let s = render(&chain(), Format::Ascii, None).unwrap();
        let widths: Vec<usize> = s.lines().map(|l| l.chars().count()).collect();
        assert!(widths.iter().all(|&w| w == widths[0]), "{s}");
        assert!(s.contains("| id | parent | name   |"), "{s}");
    }

    #[test]
    fn csv_quotes_and_json_nulls() {
        let mut b = crate::instance::InstanceBuilder::from(chain());
        b.set_attr("Material", "name", RowId(0), Value::str("a,b")).unwrap();
        b.set_attr("Material", "name", RowId(1), Value::Null("n1".into())).unwrap();
        let i = b.build().unwrap();
        let csv = render(&i, Format::Csv, None).unwrap();
        assert_eq!(csv.lines().nth(1), Some("0,1,\"a,b\""));
        let js: serde_json::Value = serde_json::from_str(&render(&i, Format::Json, None).unwrap()).unwrap();
        assert_eq!(js["Material"][1]["name"], serde_json::json!({"null": "n1"}));
    }
}
