//! Command line front end for evidential force aggregation.
//!
//! Three subcommands cover the pipeline at different depths:
//!
//! * `aggregate` runs a whole scenario, level by level, and prints the
//!   recognized force structure;
//! * `combine` fuses one cluster's reports into a joint frame and prints
//!   it with its marginal count distributions;
//! * `fit` ranks one level's template library against a single cluster.
//!
//! Exit codes: 0 success, 2 input problem (unreadable or invalid
//! scenario data), 3 configuration problem (template library, limits,
//! flag values), 4 hypothesis blow-up, 5 total conflict between reports
//! declared to describe the same object.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use forceagg_core::io::{
    emit_analysis, emit_joint, emit_run, parse_scenario, parse_templates, ParseError, ScenarioDoc,
    TemplateDoc, Verbosity,
};
use forceagg_core::rational::{parse_rational, render, whole};
use forceagg_core::{
    aggregate_cluster, aggregate_hierarchy, combine, AggregationOptions, Cluster, ClusterSpec,
    Error, ErrorClass, LevelSpec, Mass, DEFAULT_HYPOTHESIS_LIMIT,
};

/// Environment variable consulted for the hypothesis limit when
/// `--limit` is not given.
const LIMIT_ENV: &str = "FORCEAGG_LIMIT";

#[derive(Parser)]
#[command(
    name = "forceagg",
    version,
    about = "Aggregate uncertain intelligence reports into a force structure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate a whole scenario, level by level, into a force structure
    Aggregate(AggregateArgs),
    /// Combine one cluster's reports into a joint frame and marginal counts
    Combine(CombineArgs),
    /// Rank a template library against one cluster
    Fit(FitArgs),
}

#[derive(Args)]
struct AggregateArgs {
    /// Scenario file to aggregate
    #[arg(long)]
    scenario: PathBuf,
    /// Template library file
    #[arg(long)]
    templates: PathBuf,
    /// Write the report to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report detail: selection, ranking, tables or hypotheses
    #[arg(long, default_value = "selection")]
    verbosity: Verbosity,
    /// Abort if a cluster's joint frame would exceed this many hypotheses
    #[arg(long)]
    limit: Option<u64>,
    /// Drop hypotheses below this mass and renormalize (e.g. 1/100 or 0.01)
    #[arg(long)]
    prune: Option<String>,
}

#[derive(Args)]
struct CombineArgs {
    /// Scenario file holding the cluster
    #[arg(long)]
    scenario: PathBuf,
    /// Cluster to combine (may be omitted when the scenario has exactly one)
    #[arg(long)]
    cluster: Option<String>,
    /// Write the report to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Abort if the joint frame would exceed this many hypotheses
    #[arg(long)]
    limit: Option<u64>,
    /// Drop hypotheses below this mass and renormalize (e.g. 1/100 or 0.01)
    #[arg(long)]
    prune: Option<String>,
}

#[derive(Args)]
struct FitArgs {
    /// Scenario file holding the cluster
    #[arg(long)]
    scenario: PathBuf,
    /// Template library file
    #[arg(long)]
    templates: PathBuf,
    /// Cluster to rank (may be omitted when the scenario has exactly one)
    #[arg(long)]
    cluster: Option<String>,
    /// Write the report to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report detail: selection, ranking, tables or hypotheses
    #[arg(long, default_value = "selection")]
    verbosity: Verbosity,
    /// Abort if the joint frame would exceed this many hypotheses
    #[arg(long)]
    limit: Option<u64>,
    /// Drop hypotheses below this mass and renormalize (e.g. 1/100 or 0.01)
    #[arg(long)]
    prune: Option<String>,
}

/// Everything that can stop a run, tagged with how it maps to an exit
/// code.
enum CliError {
    /// A domain error from the core library; its class picks the code.
    Core(Error),
    /// A scenario or template file failed to parse.
    Parse { path: PathBuf, error: ParseError },
    /// Bad input data outside the core's jurisdiction (missing cluster,
    /// unreadable file).
    Input(String),
    /// Bad configuration (flag or environment values, cluster choice).
    Config(String),
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        CliError::Core(error)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(error) => error.fmt(f),
            CliError::Parse { path, error } => write!(f, "{}: {error}", path.display()),
            CliError::Input(message) | CliError::Config(message) => f.write_str(message),
        }
    }
}

fn class_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Input => 2,
        ErrorClass::Config => 3,
        ErrorClass::Blowup => 4,
        ErrorClass::Conflict => 5,
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(error) => class_code(error.class()),
            CliError::Parse { error, .. } => class_code(error.class()),
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Aggregate(args) => run_aggregate(args),
        Command::Combine(args) => run_combine(args),
        Command::Fit(args) => run_fit(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}

fn load_scenario(path: &Path) -> Result<ScenarioDoc, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|error| CliError::Parse {
        path: path.to_path_buf(),
        error,
    })
}

fn load_templates(path: &Path, doc: &ScenarioDoc) -> Result<TemplateDoc, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_templates(&text, &doc.universes()).map_err(|error| CliError::Parse {
        path: path.to_path_buf(),
        error,
    })
}

fn resolve_limit(flag: Option<u64>) -> Result<u64, CliError> {
    let limit = match flag {
        Some(value) => value,
        None => match std::env::var(LIMIT_ENV) {
            Ok(raw) => raw.trim().parse::<u64>().map_err(|_| {
                CliError::Config(format!("{LIMIT_ENV} must be a positive integer, got `{raw}`"))
            })?,
            Err(std::env::VarError::NotPresent) => DEFAULT_HYPOTHESIS_LIMIT,
            Err(std::env::VarError::NotUnicode(_)) => {
                return Err(CliError::Config(format!("{LIMIT_ENV} is not valid unicode")))
            }
        },
    };
    if limit == 0 {
        return Err(CliError::Config(
            "hypothesis limit must be at least 1".into(),
        ));
    }
    Ok(limit)
}

/// Parses `--prune`. A zero threshold is accepted and means "keep
/// everything", so it is folded into `None`.
fn resolve_prune(flag: Option<&str>) -> Result<Option<Mass>, CliError> {
    let Some(raw) = flag else { return Ok(None) };
    let threshold = parse_rational(raw)
        .map_err(|e| CliError::Config(format!("invalid --prune value `{raw}`: {e}")))?;
    if threshold < whole(0) || threshold >= whole(1) {
        return Err(CliError::Config(format!(
            "--prune must lie in [0, 1), got {raw}"
        )));
    }
    Ok(if threshold == whole(0) {
        None
    } else {
        Some(threshold)
    })
}

fn deliver(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Picks the cluster a single-cluster subcommand should work on, either
/// by id or because the scenario only has one.
fn pick_cluster<'a>(
    doc: &'a ScenarioDoc,
    wanted: Option<&str>,
) -> Result<(&'a LevelSpec, &'a ClusterSpec), CliError> {
    match wanted {
        Some(id) => doc
            .find_cluster(id)
            .ok_or_else(|| CliError::Input(format!("scenario has no cluster `{id}`"))),
        None => {
            if doc.cluster_count() == 1 {
                let level = doc
                    .levels
                    .iter()
                    .find(|l| !l.clusters.is_empty())
                    .expect("counted one cluster");
                Ok((level, &level.clusters[0]))
            } else {
                let ids: Vec<&str> = doc
                    .levels
                    .iter()
                    .flat_map(|l| l.clusters.iter().map(|c| c.id.as_str()))
                    .collect();
                Err(CliError::Config(format!(
                    "scenario has {} clusters; pick one with --cluster ({})",
                    doc.cluster_count(),
                    ids.join(", ")
                )))
            }
        }
    }
}

/// Materializes a leaf cluster (reports only). Clusters that consume
/// units from a previous level only make sense inside `aggregate`.
fn leaf_cluster(level: &LevelSpec, spec: &ClusterSpec) -> Result<Cluster, CliError> {
    if !spec.unit_refs.is_empty() {
        return Err(CliError::Input(format!(
            "cluster `{}` consumes units recognized at level {}; run `aggregate` instead",
            spec.id,
            level.level - 1
        )));
    }
    Ok(Cluster::new(
        spec.id.clone(),
        level.universe.clone(),
        spec.reports.clone(),
    )?)
}

fn run_aggregate(args: AggregateArgs) -> Result<(), CliError> {
    let doc = load_scenario(&args.scenario)?;
    let libraries = load_templates(&args.templates, &doc)?;
    let options = AggregationOptions {
        hypothesis_limit: resolve_limit(args.limit)?,
        prune_threshold: resolve_prune(args.prune.as_deref())?,
    };
    let run = aggregate_hierarchy(&doc.levels, &libraries, &options)?;
    let text = emit_run(&run, &libraries, args.verbosity);
    deliver(&text, args.out.as_deref())
}

fn run_combine(args: CombineArgs) -> Result<(), CliError> {
    let doc = load_scenario(&args.scenario)?;
    let (level, spec) = pick_cluster(&doc, args.cluster.as_deref())?;
    let cluster = leaf_cluster(level, spec)?;
    let joint = combine(&cluster, resolve_limit(args.limit)?)?;
    let (joint, removed) = match resolve_prune(args.prune.as_deref())? {
        Some(threshold) => {
            let (pruned, removed) = joint.prune(&threshold)?;
            (pruned, Some(removed))
        }
        None => (joint, None),
    };
    let marginals = joint.marginalize();
    let mut text = emit_joint(&joint, &marginals);
    if let Some(removed) = removed {
        text.push_str(&format!("pruned mass {}\n", render(&removed)));
    }
    deliver(&text, args.out.as_deref())
}

fn run_fit(args: FitArgs) -> Result<(), CliError> {
    let doc = load_scenario(&args.scenario)?;
    let libraries = load_templates(&args.templates, &doc)?;
    let (level, spec) = pick_cluster(&doc, args.cluster.as_deref())?;
    let cluster = leaf_cluster(level, spec)?;
    let templates = libraries
        .get(&level.level)
        .ok_or(Error::MissingTemplateLevel { level: level.level })?;
    let options = AggregationOptions {
        hypothesis_limit: resolve_limit(args.limit)?,
        prune_threshold: resolve_prune(args.prune.as_deref())?,
    };
    let analysis = aggregate_cluster(&cluster, templates, level.level, &options)?;
    let text = emit_analysis(&analysis, templates, args.verbosity);
    deliver(&text, args.out.as_deref())
}
