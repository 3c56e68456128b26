use std::path::{Path, PathBuf};
use std::process::ExitCode;

use catql::enrich::{self, ScenarioConfig};
use catql::query::{
    eval_desugared, eval_query_with, parse_query, parse_script, run_script, Env, RunConfig,
};
use catql::render::{render, Format};
use catql::sql::{export_sql, import_sql, parse_fk_spec, ImportOptions};
use catql::{Error, Instance, Result, Strategy, DEFAULT_PATH_BOUND};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "catql", version, about = "Functorial data migration and semantic enrichment")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output format: ascii, csv or json.
    #[arg(long, global = true, default_value = "ascii")]
    format: String,
    /// Rewrite-step and enumeration bound for path reasoning.
    #[arg(long, global = true, default_value_t = DEFAULT_PATH_BOUND)]
    path_bound: usize,
    /// Depth of the reflexive-transitive closure.
    #[arg(long, global = true, default_value_t = 3)]
    closure_n: usize,
    /// JSON sidecar naming foreign-key columns: {table: {column: target}}.
    #[arg(long, global = true)]
    fk_spec: Option<PathBuf>,
    /// Treat `*_id` columns as foreign keys when a matching table exists.
    #[arg(long, global = true)]
    infer_ids: bool,
    /// Disable data-parallel evaluation.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Import a SQL file and print the resulting instance.
    ImportSql { file: PathBuf },
    /// Run a script, printing its `show` output.
    Run { script: PathBuf },
    /// Reflexive-transitive closure of a parent function.
    Closure {
        /// Script binding the parent function.
        file: PathBuf,
        /// Name of the parent-function instance in the script.
        #[arg(long, default_value = "parent")]
        name: String,
    },
    /// Enrich a portal database with an ontology translated through synonyms.
    Enrich {
        /// The portal database (.sql).
        #[arg(long)]
        portal: PathBuf,
        /// Script defining `parent`, the ontology's parent function.
        #[arg(long)]
        parent: PathBuf,
        /// Script defining `syn`, pairs (ontology word, portal word).
        #[arg(long)]
        syn: PathBuf,
        /// Table whose rows the ontology talks about.
        #[arg(long, default_value = "material")]
        target: String,
        /// String column of the target table holding the names.
        #[arg(long, default_value = "material_Material_Name")]
        name_attr: String,
        /// Query file to run before and after enrichment.
        #[arg(long)]
        query: Option<PathBuf>,
        /// Print the generated enrichment script.
        #[arg(long)]
        emit_script: bool,
        /// Write the enriched database as SQL.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Evaluate a select/from/where query against a database.
    Query {
        query: PathBuf,
        /// A .sql file, or a .catql script together with --instance.
        source: PathBuf,
        #[arg(long)]
        instance: Option<String>,
        /// Evaluate through the sigma . pi . delta translation.
        #[arg(long)]
        desugar: bool,
    },
    /// Export an instance as SQL.
    ExportSql {
        source: PathBuf,
        #[arg(long)]
        instance: Option<String>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Render an instance as a table, CSV or JSON.
    Show {
        source: PathBuf,
        /// Instance name, required for scripts.
        instance: Option<String>,
        /// Render only this node.
        #[arg(long)]
        node: Option<String>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

impl Global {
    fn strategy(&self) -> Strategy {
        if self.sequential {
            Strategy::Sequential
        } else {
            Strategy::default()
        }
    }

    fn run_config(&self, base: &Path) -> Result<RunConfig> {
        Ok(RunConfig {
            path_bound: self.path_bound,
            strategy: self.strategy(),
            base_dir: base.to_path_buf(),
            fk_spec: self.fk_spec()?,
            infer_id_columns: self.infer_ids,
            format: self.format.parse()?,
        })
    }

    fn fk_spec(&self) -> Result<Option<catql::sql::FkSpec>> {
        self.fk_spec.as_deref().map(|p| read(p).and_then(|t| parse_fk_spec(&t))).transpose()
    }

    fn run_script_file(&self, path: &Path) -> Result<Env> {
        let ast = parse_script(&read(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let env = run_script(&ast, &self.run_config(base)?)?;
        for w in &env.warnings {
            eprintln!("warning: {w}");
        }
        Ok(env)
    }

    /// An instance from a `.sql` file, or a named instance from a script.
    fn load(&self, path: &Path, name: Option<&str>) -> Result<Instance> {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("sql")) {
            let opts = ImportOptions {
                schema_name: path.file_stem().map_or("sql".into(), |s| s.to_string_lossy().into_owned()),
                fk_spec: self.fk_spec()?,
                infer_id_columns: self.infer_ids,
            };
            return Ok(import_sql(&read(path)?, &opts)?.1);
        }
        let name = name.ok_or_else(|| Error::UnknownName("(an instance name is required for scripts)".into()))?;
        self.run_script_file(path)?.instance(name).cloned()
    }
}

fn pairs_table(rel: &Instance, format: Format) -> Result<String> {
    let q = parse_query("select r.left.name as left, r.right.name as right from is-a as r")?;
    render(&eval_query_with(&q, rel, Strategy::default())?, format, None)
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let format: Format = g.format.parse()?;
    match &cli.command {
        Command::ImportSql { file } => {
            print!("{}", render(&g.load(file, None)?, format, None)?);
        }
        Command::Run { script } => {
            let env = g.run_script_file(script)?;
            for (k, out) in env.outputs.iter().enumerate() {
                if k > 0 {
                    println!();
                }
                if format == Format::Ascii && out.format == Format::Ascii {
                    println!("{}:", out.name);
                }
                print!("{}", out.text);
            }
        }
        Command::Closure { file, name } => {
            let parent = g.load(file, Some(name))?;
            let closed = enrich::transitive_closure_with(&parent, g.closure_n, g.strategy())?;
            print!("{}", pairs_table(&closed, format)?);
        }
        Command::Enrich { portal, parent, syn, target, name_attr, query, emit_script, out } => {
            let cfg = ScenarioConfig {
                closure_n: g.closure_n,
                path_bound: g.path_bound,
                portal_sql: portal.clone(),
                fk_spec: g.fk_spec.clone(),
                parent: parent.clone(),
                syn: syn.clone(),
                target_node: target.clone(),
                name_attr: name_attr.clone(),
                strategy: g.strategy(),
            };
            let sc = enrich::run_scenario(&cfg)?;
            for n in &sc.enriched.notes {
                eprintln!("note: {n}");
            }
            if *emit_script {
                println!("{}", sc.enriched.script);
            }
            println!("translated is-a pairs: {}", enrich::relation_pairs(&sc.isa_prime)?.len());
            if let Some(q) = query {
                let q = parse_query(&read(q)?)?;
                let before = eval_query_with(&q, &sc.portal, g.strategy())?;
                let after = eval_query_with(&q, &sc.enriched.instance, g.strategy())?;
                println!("before enrichment: {} rows", before.total_rows());
                print!("{}", render(&before, format, None)?);
                println!("after enrichment: {} rows", after.total_rows());
                print!("{}", render(&after, format, None)?);
            }
            if let Some(path) = out {
                let ex = export_sql(&sc.enriched.instance);
                for w in &ex.warnings {
                    eprintln!("warning: {w}");
                }
                write(path, &ex.text)?;
            }
        }
        Command::Query { query, source, instance, desugar } => {
            let q = parse_query(&read(query)?)?;
            let inst = g.load(source, instance.as_deref())?;
            let res = if *desugar {
                eval_desugared(&q, &inst, g.path_bound)?
            } else {
                eval_query_with(&q, &inst, g.strategy())?
            };
            print!("{}", render(&res, format, None)?);
        }
        Command::ExportSql { source, instance, out } => {
            let ex = export_sql(&g.load(source, instance.as_deref())?);
            for w in &ex.warnings {
                eprintln!("warning: {w}");
            }
            match out {
                Some(p) => write(p, &ex.text)?,
                None => print!("{}", ex.text),
            }
        }
        Command::Show { source, instance, node } => {
            print!("{}", render(&g.load(source, instance.as_deref())?, format, node.as_deref())?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_internal() { 2 } else { 1 })
        }
        Err(_) => ExitCode::from(2),
    }
}
