//! Command-line interface: dataset generation, discovery, projections,
//! adjustment queries, separation queries, scoring, correlation analysis,
//! score-based model selection and the built-in fixture suite.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure,
//! 3 fixture failure.

use clap::{Args, Parser, Subcommand};
use selfcompat::adjustment::{
    canonical_adjustment_set, forbidden_set, is_valid_adjustment, parent_adjustment_valid,
    AdjustmentQuery,
};
use selfcompat::discovery::{run_algorithm, AlgorithmHandle};
use selfcompat::graph::{Graph, GraphKind, NodeId};
use selfcompat::harness::fixtures::run_fixtures;
use selfcompat::harness::{
    cmd_correlate, cmd_generate, cmd_score, cmd_select, read_manifest, read_records,
    ExperimentConfig, ScoreColumn,
};
use selfcompat::projection::{dag_to_cpdag, latent_admg, latent_cpdag, latent_mag, latent_pag};
use selfcompat::scm::Dataset;
use selfcompat::separation::{definite_status_open_paths, is_m_separated, PathQuery};
use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "selfcompat",
    about = "Evaluate causal discovery algorithms by the self-compatibility of their outputs"
)]
struct Cli {
    /// Worker threads for dataset- and subset-level parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate synthetic datasets and ground-truth graphs.
    Generate(GenerateArgs),
    /// Run one discovery algorithm on a CSV and write the graph JSON.
    Discover(DiscoverArgs),
    /// Project a graph onto a subset of its nodes.
    Project(ProjectArgs),
    /// Adjustment-set queries on a graph.
    Adjust(AdjustArgs),
    /// Separation queries on a graph.
    Query(QueryArgs),
    /// Score algorithms on generated datasets.
    Score(ScoreArgs),
    /// Correlate scores with the distance to ground truth.
    Correlate(CorrelateArgs),
    /// Pick between two algorithm labels by score, judged by SHD.
    Select(SelectArgs),
    /// Run the built-in fixture suite.
    Fixtures,
}

#[derive(Args)]
struct GenerateArgs {
    /// JSON experiment configuration; defaults apply for missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiscoverArgs {
    /// Input dataset CSV.
    #[arg(long = "in")]
    input: PathBuf,
    /// Algorithm spec JSON, e.g. '{"type":"builtin_pc","alpha":0.01}'.
    #[arg(long)]
    algorithm: String,
    /// Restrict to these columns (comma separated); default all.
    #[arg(long)]
    subset: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Comma-separated node names to keep.
    #[arg(long)]
    keep: String,
    /// Target class: admg | mag | cpdag | pag.
    #[arg(long = "as")]
    target: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AdjustArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    treatment: String,
    #[arg(long)]
    outcome: String,
    /// Candidate adjustment set to check (comma separated).
    #[arg(long)]
    set: Option<String>,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    /// Conditioning set (comma separated).
    #[arg(long)]
    given: Option<String>,
}

#[derive(Args)]
struct ScoreArgs {
    /// Directory produced by `generate` (holds manifest.json).
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Optional config override; default is the manifest's config.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CorrelateArgs {
    /// records.csv produced by `score`.
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    /// kappa_g (default) or kappa_i.
    #[arg(long, default_value = "kappa_g")]
    by: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized");
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[derive(Debug)]
struct CliError {
    message: String,
    config_error: bool,
}

impl CliError {
    fn config<M: Into<String>>(message: M) -> Self {
        CliError {
            message: message.into(),
            config_error: true,
        }
    }

    fn runtime<M: Into<String>>(message: M) -> Self {
        CliError {
            message: message.into(),
            config_error: false,
        }
    }

    fn exit_code(&self) -> u8 {
        if self.config_error {
            1
        } else {
            2
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::runtime(e.to_string())
}

fn parse_node_list(text: &str) -> BTreeSet<NodeId> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(NodeId::from)
        .collect()
}

fn load_graph(path: &PathBuf) -> Result<Graph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    Graph::decode(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn run(cmd: Cmd) -> Result<ExitCode, CliError> {
    match cmd {
        Cmd::Generate(args) => {
            let mut config = match &args.config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        CliError::config(format!("cannot read {}: {e}", path.display()))
                    })?;
                    serde_json::from_str::<ExperimentConfig>(&text)
                        .map_err(|e| CliError::config(format!("config: {e}")))?
                }
                None => ExperimentConfig::default(),
            };
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            config
                .validate()
                .map_err(|e| CliError::config(e.to_string()))?;
            let manifest = cmd_generate(&config, &args.out).map_err(runtime)?;
            println!(
                "generated {} datasets under {}",
                manifest.datasets.len(),
                args.out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Discover(args) => {
            let handle: AlgorithmHandle = serde_json::from_str(&args.algorithm)
                .map_err(|e| CliError::config(format!("algorithm spec: {e}")))?;
            let data = Dataset::read_csv_file(&args.input)
                .map_err(|e| CliError::config(e.to_string()))?;
            let subset = match &args.subset {
                Some(s) => parse_node_list(s),
                None => data.column_set(),
            };
            let outcome = run_algorithm(&handle, &data, &subset).map_err(runtime)?;
            match outcome.graph() {
                Some(g) => {
                    std::fs::write(&args.out, g.encode()).map_err(runtime)?;
                    println!("wrote {}", args.out.display());
                }
                None => {
                    std::fs::write(&args.out, "BOT").map_err(runtime)?;
                    println!("algorithm returned the failure token; wrote BOT sentinel");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Project(args) => {
            let graph = load_graph(&args.input)?;
            let keep = parse_node_list(&args.keep);
            let projected = match args.target.as_str() {
                "admg" => latent_admg(&graph, &keep),
                "mag" => latent_mag(&graph, &keep),
                "cpdag" => {
                    if graph.kind() == GraphKind::DAG && keep == graph.node_set() {
                        dag_to_cpdag(&graph)
                    } else {
                        latent_cpdag(&graph, &keep)
                    }
                }
                "pag" => latent_pag(&graph, &keep),
                other => {
                    return Err(CliError::config(format!(
                        "unknown projection target `{other}` (use admg|mag|cpdag|pag)"
                    )))
                }
            }
            .map_err(runtime)?;
            std::fs::write(&args.out, projected.encode()).map_err(runtime)?;
            println!("wrote {}", args.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Adjust(args) => {
            let graph = load_graph(&args.input)?;
            let forb = forbidden_set(&graph, &args.treatment, &args.outcome).map_err(runtime)?;
            let canonical = canonical_adjustment_set(&graph, &args.treatment, &args.outcome)
                .map_err(runtime)?;
            println!("forbidden: {}", join(&forb));
            println!("canonical: {}", join(&canonical));
            let canonical_query = AdjustmentQuery {
                treatment: NodeId::from(args.treatment.as_str()),
                outcome: NodeId::from(args.outcome.as_str()),
                candidate: canonical.clone(),
            };
            let canonical_valid =
                is_valid_adjustment(&graph, &canonical_query).map_err(runtime)?;
            println!("canonical valid: {canonical_valid}");
            if matches!(graph.kind(), GraphKind::DAG | GraphKind::ADMG) {
                let (valid, parents) =
                    parent_adjustment_valid(&graph, &args.treatment, &args.outcome)
                        .map_err(runtime)?;
                println!(
                    "parent adjustment valid: {valid} (parents: {})",
                    join(&parents)
                );
            }
            if let Some(set) = &args.set {
                let q = AdjustmentQuery {
                    treatment: NodeId::from(args.treatment.as_str()),
                    outcome: NodeId::from(args.outcome.as_str()),
                    candidate: parse_node_list(set),
                };
                let valid = is_valid_adjustment(&graph, &q).map_err(runtime)?;
                println!("candidate valid: {valid}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Query(args) => {
            let graph = load_graph(&args.input)?;
            let q = PathQuery {
                x: NodeId::from(args.x.as_str()),
                y: NodeId::from(args.y.as_str()),
                conditioning: args
                    .given
                    .as_deref()
                    .map(parse_node_list)
                    .unwrap_or_default(),
            };
            match graph.kind() {
                GraphKind::DAG | GraphKind::ADMG | GraphKind::MAG => {
                    let sep = is_m_separated(&graph, &q).map_err(runtime)?;
                    println!("m-separated: {sep}");
                }
                GraphKind::CPDAG | GraphKind::PAG => {
                    let open = definite_status_open_paths(&graph, &q).map_err(runtime)?;
                    println!("open definite-status non-causal path: {open}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Score(args) => {
            let mut manifest =
                read_manifest(&args.data).map_err(|e| CliError::config(e.to_string()))?;
            if let Some(path) = &args.config {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::config(format!("cannot read {}: {e}", path.display()))
                })?;
                manifest.config = serde_json::from_str(&text)
                    .map_err(|e| CliError::config(format!("config: {e}")))?;
            }
            manifest
                .config
                .validate()
                .map_err(|e| CliError::config(e.to_string()))?;
            let records = cmd_score(&manifest, &args.data, &args.out).map_err(runtime)?;
            println!(
                "scored {} runs; records under {}",
                records.len(),
                args.out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Correlate(args) => {
            let records =
                read_records(&args.records).map_err(|e| CliError::config(e.to_string()))?;
            let rows = cmd_correlate(&records).map_err(runtime)?;
            for row in &rows {
                println!(
                    "{}: n={} pearson r={:.3} (p={:.2e}) spearman r={:.3} (p={:.2e}) partial|degree r={:.3} (p={:.2e})",
                    row.score,
                    row.n,
                    row.pearson_r,
                    row.pearson_p,
                    row.spearman_r,
                    row.spearman_p,
                    row.partial_r_given_degree,
                    row.partial_p_given_degree
                );
            }
            if let Some(out) = &args.out {
                let text = serde_json::to_string_pretty(&rows).map_err(runtime)?;
                std::fs::write(out, text).map_err(runtime)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Select(args) => {
            let records =
                read_records(&args.records).map_err(|e| CliError::config(e.to_string()))?;
            let by = match args.by.as_str() {
                "kappa_g" => ScoreColumn::KappaG,
                "kappa_i" => ScoreColumn::KappaI,
                other => {
                    return Err(CliError::config(format!("unknown score column `{other}`")))
                }
            };
            let summary = cmd_select(&records, &args.a, &args.b, by).map_err(runtime)?;
            println!(
                "strictly better: {:.1}%  ties: {:.1}%  strictly worse: {:.1}%",
                100.0 * summary.strictly_better,
                100.0 * summary.ties,
                100.0 * summary.strictly_worse
            );
            if let Some(out) = &args.out {
                let mut writer = csv::Writer::from_path(out).map_err(runtime)?;
                for row in &summary.rows {
                    writer.serialize(row).map_err(runtime)?;
                }
                writer.flush().map_err(runtime)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Fixtures => {
            let report = run_fixtures();
            for r in &report.results {
                let status = if r.passed { "PASS" } else { "FAIL" };
                println!("[{status}] {}: {}", r.name, r.note);
            }
            if report.all_passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
    }
}

fn join(set: &BTreeSet<NodeId>) -> String {
    if set.is_empty() {
        return "(empty)".into();
    }
    set.iter()
        .map(|n| n.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}
