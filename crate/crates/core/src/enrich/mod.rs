//! Semantic enrichment: closures of parent functions, relation algebra on the
//! span schema, and the generated enrichment script.

mod generate;
mod relation;

use std::path::{Path as FsPath, PathBuf};

pub use generate::{enrich, generate_enrichment, link_view, retarget, Enriched, ENRICHED, ISA_PRIME, PORTAL};
pub use relation::*;

use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::instance::Instance;
use crate::kernel::DEFAULT_PATH_BOUND;
use crate::query::{parse_script, run_script, RunConfig};
use crate::sql::{import_sql, parse_fk_spec, ImportOptions};

/// Inputs and knobs of the end-to-end scenario.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub closure_n: usize,
    pub path_bound: usize,
    pub portal_sql: PathBuf,
    pub fk_spec: Option<PathBuf>,
    /// Script binding an instance named `parent` (a parent function).
    pub parent: PathBuf,
    /// Script binding an instance named `syn` (ontology word, portal word).
    pub syn: PathBuf,
    pub target_node: String,
    pub name_attr: String,
    pub strategy: Strategy,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            closure_n: 3,
            path_bound: DEFAULT_PATH_BOUND,
            portal_sql: PathBuf::new(),
            fk_spec: None,
            parent: PathBuf::new(),
            syn: PathBuf::new(),
            target_node: "material".into(),
            name_attr: "material_Material_Name".into(),
            strategy: Strategy::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub portal: Instance,
    pub isa: Instance,
    pub isa_prime: Instance,
    pub enriched: Enriched,
}

pub(crate) fn read(path: &FsPath) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn run_config(cfg: &ScenarioConfig, base: &FsPath) -> RunConfig {
    RunConfig {
        path_bound: cfg.path_bound,
        strategy: cfg.strategy,
        base_dir: base.to_path_buf(),
        ..RunConfig::default()
    }
}

/// Runs a script file and returns the instance it binds to `name`.
pub fn load_instance(path: &FsPath, name: &str, cfg: &RunConfig) -> Result<Instance> {
    let ast = parse_script(&read(path)?)?;
    let mut cfg = cfg.clone();
    if let Some(dir) = path.parent() {
        cfg.base_dir = dir.to_path_buf();
    }
    let env = run_script(&ast, &cfg)?;
    env.instance(name).cloned()
}

/// Imports the portal, closes the parent function, translates it through
/// the synonyms and enriches the portal with the result.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Scenario> {
    let base = cfg.portal_sql.parent().unwrap_or(FsPath::new("."));
    let rc = run_config(cfg, base);
    let fk_spec = cfg.fk_spec.as_deref().map(|p| read(p).and_then(|t| parse_fk_spec(&t))).transpose()?;
    let opts = ImportOptions { schema_name: "portal".into(), fk_spec, infer_id_columns: false };
    let (_, portal) = import_sql(&read(&cfg.portal_sql)?, &opts)?;
    let parent = load_instance(&cfg.parent, "parent", &rc)?;
    let syn = load_instance(&cfg.syn, "syn", &rc)?;
    let isa = transitive_closure_with(&parent, cfg.closure_n, cfg.strategy)?;
    let isa_prime = translate_isa(&isa, &syn, cfg.closure_n)?;
    let enriched = enrich(&portal, &isa_prime, &cfg.target_node, &cfg.name_attr, &rc)?;
    Ok(Scenario { portal, isa, isa_prime, enriched })
}
