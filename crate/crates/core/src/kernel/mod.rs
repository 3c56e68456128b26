//! Finitely presented categories (schemas), paths, the word problem for path
//! equality, and functors between schemas (mappings).

mod mapping;
mod path;
mod rewrite;
mod schema;

pub use mapping::{compose_mappings, AttrImage, Mapping, MappingBuilder};
pub use path::{Path, PathEquation, Sort};
pub use schema::{Attribute, BaseType, Edge, Schema, SchemaBuilder};

/// Default cap on rewrite steps and hom-set exploration.
pub const DEFAULT_PATH_BOUND: usize = 512;
