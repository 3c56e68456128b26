//! A functorial data migration engine.
//!
//! Schemas are finitely presented categories (nodes, edges, typed attributes and
//! path equations), instances are set-valued functors on them, and data moves
//! between schemas along mappings with the three migration functors
//! [`delta`](migrate::delta), [`sigma`](migrate::sigma) and [`pi`](migrate::pi).
//!
//! On top of the kernel sit a select/from/where query layer with a direct
//! join evaluator and a desugaring into `sigma . pi . delta`, a bridge to a
//! restricted SQL dialect, and the relation toolkit used by the semantic
//! enrichment pipeline.

pub mod enrich;
pub mod error;
pub mod exec;
pub mod instance;
pub mod kernel;
pub mod migrate;
pub mod query;
pub mod render;
pub mod sql;
pub mod value;

pub use error::{Error, Result};
pub use exec::Strategy;
pub use instance::{Datum, Instance, InstanceBuilder, RowId};
pub use kernel::{
    AttrImage, Attribute, BaseType, Edge, Mapping, MappingBuilder, Path, PathEquation, Schema,
    SchemaBuilder, Sort, DEFAULT_PATH_BOUND,
};
pub use value::Value;
