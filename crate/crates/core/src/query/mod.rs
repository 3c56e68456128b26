//! The script language: schemas, instances and mappings as literals,
//! migrations and select/from/where queries as let-bound expressions.

mod ast;
mod desugar;
mod eval;
mod lexer;
mod parser;
mod script;
mod typecheck;

pub use ast::*;
pub use desugar::{desugar_query, eval_desugared, split_disjunctions, Desugared};
pub use eval::{eval_query_direct, eval_query_with, eval_typed};
pub use parser::{parse_query, parse_script};
pub use script::{run_script, run_script_in, Entry as EnvEntry, Env, Output, RunConfig};
pub use typecheck::{typecheck_query, BoundPath, Cond, SelectColumn, TypedQuery, RESULT_NODE};
