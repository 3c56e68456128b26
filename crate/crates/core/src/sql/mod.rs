//! A restricted SQL dialect in categorical normal form: every table has an
//! integer primary key named first, attribute columns, and integer foreign
//! key columns.
//!
//! ```text
//! CREATE TABLE name ( col type [PRIMARY KEY] [REFERENCES table [(col)]] , ... );
//! INSERT INTO name VALUES (v, ...), (v, ...);
//! ```
//!
//! Types are `INT`/`INTEGER` and `VARCHAR(n)`. Keywords are case-insensitive,
//! `--` starts a comment, strings take single or double quotes (a doubled
//! quote escapes itself), and backticks quote identifiers.

mod export;
mod import;
mod lexer;

pub use export::{export_sql, Exported};
pub use import::{import_sql, parse_fk_spec, FkSpec, ImportOptions, SqlColumn, SqlTableDef, SqlType};
