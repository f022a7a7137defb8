use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use priorcd::harness::{
    compare, expand_names, load_csv_dataset, read_json, run_experiment, write_json, BuiltinGraph,
    ExperimentConfig, ExperimentReport, PriorConfig, SACHS_PROMPT_NAMES,
};
use priorcd::metrics::{evaluate, MetricsReport};
use priorcd::prior::{
    acquire_prior, aggregate_mean, assemble_prior, certainty, parse_response, random_prior,
    render_prompt, HttpPriorSource, MeanPrior, PairVerdict, PriorMatrix, RecordedResponses,
    UnparseablePolicy,
};
use priorcd::solver::{solve, PriorTarget, SolverConfig};
use priorcd::synthetic::{
    build_motivating_scenario, sample_linear_sem, SemSpec, PHYSICS_LONG_NAMES,
    PHYSICS_NOISE_VARIANCE, PHYSICS_SAMPLE_COUNT,
};
use priorcd::DirectedGraph;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

/// Bad command-line input, reported with exit code 1.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

#[derive(Parser)]
#[command(
    name = "priorcd",
    version,
    about = "Causal discovery with language-model priors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic dataset from a built-in graph.
    Generate(GenerateArgs),
    /// Prompt rendering, response parsing and prior matrices.
    #[command(subcommand)]
    Prior(PriorCommand),
    /// Learn a graph from a CSV dataset.
    Discover(DiscoverArgs),
    /// Score a predicted graph against a ground truth.
    Evaluate(EvaluateArgs),
    /// Run a full experiment from a config file.
    Run(RunArgs),
    /// Per-metric deltas between two experiment reports.
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// physics3, physics5, physics7 or motivating
    #[arg(long, default_value = "physics7")]
    graph: String,
    #[arg(long, default_value_t = PHYSICS_SAMPLE_COUNT)]
    samples: usize,
    #[arg(long, default_value_t = PHYSICS_NOISE_VARIANCE)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    standardize: bool,
    /// Output directory for data.csv, graph.json and sem.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum PriorCommand {
    /// Print the pairwise prompt for two variables.
    Render { var_a: String, var_b: String },
    /// Extract the answer letter from a response file (stdin if omitted).
    Parse { file: Option<PathBuf> },
    /// Build a binary prior from verdicts, recorded responses or an endpoint.
    Assemble(AssembleArgs),
    /// Average several binary priors.
    Aggregate(AggregateArgs),
    /// Draw a uniformly random prior with a given edge count.
    Random(RandomArgs),
}

#[derive(Args)]
struct NamesArgs {
    /// Comma-separated variable names.
    #[arg(long, value_delimiter = ',', conflicts_with = "data")]
    names: Option<Vec<String>>,
    /// Take variable names from this CSV header.
    #[arg(long)]
    data: Option<PathBuf>,
}

impl NamesArgs {
    fn resolve(&self) -> Result<Vec<String>> {
        match (&self.names, &self.data) {
            (Some(n), _) => Ok(n.clone()),
            (None, Some(path)) => Ok(priorcd::Dataset::<f64>::load_csv(path)?.names().to_vec()),
            (None, None) => Err(usage("give --names or --data")),
        }
    }
}

#[derive(Args)]
struct AssembleArgs {
    #[command(flatten)]
    names: NamesArgs,
    /// JSON list of {"var_a", "var_b", "answer"} verdicts.
    #[arg(long, conflicts_with = "source")]
    verdicts: Option<PathBuf>,
    /// Recorded-response directory or http(s) endpoint.
    #[arg(long)]
    source: Option<String>,
    /// Names used inside prompts: `physics`, `sachs` or a JSON map file.
    #[arg(long)]
    prompt_names: Option<String>,
    /// Retry unparseable answers this many times instead of reading them as D.
    #[arg(long)]
    retries: Option<usize>,
    /// Environment variable whose value is sent as the Authorization header.
    #[arg(long)]
    credential_env: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AggregateArgs {
    /// Binary prior JSON files, one per repeated run.
    #[arg(required = true)]
    priors: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the certainty matrix here.
    #[arg(long)]
    certainty: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
}

#[derive(Args)]
struct RandomArgs {
    #[command(flatten)]
    names: NamesArgs,
    #[arg(long)]
    edges: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolverArgs {
    /// Named hyperparameter preset.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Solver config JSON (for `discover`) or experiment config (for `run`).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    standardize: bool,
    /// Prior: a JSON file, a recorded-response directory, an http(s) URL,
    /// `random:K`, `truth` or `none`.
    #[arg(long)]
    prior: Option<String>,
}

#[derive(Args)]
struct DiscoverArgs {
    /// CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Seed for a `random:K` prior.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for w.json and graph.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Half-open range `a..b` or inclusive `a..=b`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    baseline: PathBuf,
    candidate: PathBuf,
    #[arg(long)]
    json: bool,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || {
        usage(format!(
            "invalid seed range `{text}`; expected a..b or a..=b"
        ))
    };
    let (a, b, inclusive) = if let Some((a, b)) = text.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = text.split_once("..") {
        (a, b, false)
    } else {
        return Err(bad());
    };
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    let seeds: Vec<u64> = if inclusive {
        (a..=b).collect()
    } else {
        (a..b).collect()
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

/// Maps a `--prior` argument onto a prior source.
fn parse_prior(text: &str) -> Result<PriorConfig> {
    if let Some(k) = text.strip_prefix("random:") {
        let edge_count = k
            .parse()
            .map_err(|_| usage(format!("invalid edge count in `{text}`")))?;
        return Ok(PriorConfig::Random {
            edge_count,
            repeats: 1,
        });
    }
    match text {
        "none" => return Ok(PriorConfig::None),
        "truth" => return Ok(PriorConfig::GroundTruth),
        _ => {}
    }
    if text.starts_with("http://") || text.starts_with("https://") {
        return Ok(PriorConfig::Http {
            url: text.to_string(),
            timeout_secs: 60,
            retries: 1,
            credential_env: None,
            credential_header: "Authorization".into(),
            on_unparseable: UnparseablePolicy::default(),
            repeats: 1,
        });
    }
    let path = PathBuf::from(text);
    if path.is_dir() {
        Ok(PriorConfig::Recorded {
            dirs: vec![path],
            on_unparseable: UnparseablePolicy::default(),
        })
    } else if path.is_file() {
        Ok(PriorConfig::Json { path })
    } else {
        Err(usage(format!(
            "--prior `{text}` is not a file, directory, URL or random:K"
        )))
    }
}

fn prompt_names(arg: Option<&str>, names: &[String]) -> Result<Option<Vec<String>>> {
    Ok(match arg {
        None => None,
        Some("physics") => Some(expand_names(names, PHYSICS_LONG_NAMES)),
        Some("sachs") => Some(expand_names(names, SACHS_PROMPT_NAMES)),
        Some(path) => {
            let map: std::collections::BTreeMap<String, String> = read_json(Path::new(path))?;
            Some(expand_names(
                names,
                map.iter().map(|(k, v)| (k.as_str(), v.as_str())),
            ))
        }
    })
}

fn generate(args: GenerateArgs) -> Result<u8> {
    let graph = BuiltinGraph::parse(&args.graph).map_err(|e| usage(e.to_string()))?;
    std::fs::create_dir_all(&args.out)?;
    let (g, ds) = if graph == BuiltinGraph::Motivating {
        build_motivating_scenario(args.seed)?
    } else {
        let g = graph.graph()?;
        let spec =
            SemSpec::<f64>::with_default_weights(g.clone(), args.noise, args.samples, args.seed)?;
        write_json(&args.out.join("sem.json"), &spec)?;
        let ds = sample_linear_sem(&spec)?;
        (g, ds)
    };
    let ds = if args.standardize {
        ds.standardized()?
    } else {
        ds
    };
    ds.save_csv(&args.out.join("data.csv"))?;
    write_json(&args.out.join("graph.json"), &g)?;
    println!(
        "wrote {} rows x {} columns to {}",
        ds.n_samples(),
        ds.dim(),
        args.out.join("data.csv").display()
    );
    Ok(0)
}

fn prior_command(cmd: PriorCommand) -> Result<u8> {
    match cmd {
        PriorCommand::Render { var_a, var_b } => {
            println!("{}", render_prompt(&var_a, &var_b)?);
        }
        PriorCommand::Parse { file } => {
            let text = match file {
                Some(p) => std::fs::read_to_string(&p).with_context(|| p.display().to_string())?,
                None => {
                    let mut s = String::new();
                    std::io::stdin().read_to_string(&mut s)?;
                    s
                }
            };
            println!("{}", parse_response(&text)?);
        }
        PriorCommand::Assemble(args) => {
            let names = args.names.resolve()?;
            let policy = match args.retries {
                Some(n) => UnparseablePolicy::Retry { attempts: n + 1 },
                None => UnparseablePolicy::TreatAsNone,
            };
            let prompt = prompt_names(args.prompt_names.as_deref(), &names)?;
            let prior = match (&args.verdicts, &args.source) {
                (Some(path), _) => {
                    let verdicts: Vec<PairVerdict> = read_json(path)?;
                    assemble_prior(&verdicts, &names)?
                }
                (None, Some(src)) if src.starts_with("http://") || src.starts_with("https://") => {
                    let mut source =
                        HttpPriorSource::new(src.clone(), std::time::Duration::from_secs(60), 3);
                    if let Some(var) = &args.credential_env {
                        let value = std::env::var(var)
                            .map_err(|_| anyhow!("environment variable {var} is not set"))?;
                        source = source.with_header("Authorization", value);
                    }
                    acquire_prior(&source, &names, prompt.as_deref(), policy)?
                }
                (None, Some(dir)) => acquire_prior(
                    &RecordedResponses::new(dir),
                    &names,
                    prompt.as_deref(),
                    policy,
                )?,
                (None, None) => return Err(usage("give --verdicts or --source")),
            };
            write_json(&args.out, &prior)?;
            println!("{} edges", prior.edge_count());
        }
        PriorCommand::Aggregate(args) => {
            let priors = args
                .priors
                .iter()
                .map(|p| PriorMatrix::load_json(p))
                .collect::<priorcd::Result<Vec<_>>>()?;
            let mean = aggregate_mean(&priors)?;
            write_json(&args.out, &mean)?;
            if let Some(path) = &args.certainty {
                write_json(path, &certainty(&priors, args.epsilon)?)?;
            }
            println!("averaged {} priors", mean.run_count());
        }
        PriorCommand::Random(args) => {
            let names = args.names.resolve()?;
            let prior = random_prior(names.len(), args.edges, &names, args.seed)?;
            write_json(&args.out, &prior)?;
        }
    }
    Ok(0)
}

fn load_prior_target(text: &str, names: &[String], seed: u64) -> Result<Option<PriorTarget<f64>>> {
    Ok(match parse_prior(text)? {
        PriorConfig::None => None,
        PriorConfig::GroundTruth => {
            return Err(usage(
                "`--prior truth` needs an experiment with a ground truth",
            ))
        }
        PriorConfig::Random { edge_count, .. } => Some(PriorTarget::from(&random_prior(
            names.len(),
            edge_count,
            names,
            seed,
        )?)),
        PriorConfig::Json { path } => {
            let value: serde_json::Value = read_json(&path)?;
            if value.get("run_count").is_some() {
                Some(PriorTarget::from(&serde_json::from_value::<MeanPrior>(
                    value,
                )?))
            } else {
                Some(PriorTarget::from(&serde_json::from_value::<PriorMatrix>(
                    value,
                )?))
            }
        }
        PriorConfig::Recorded {
            dirs,
            on_unparseable,
        } => Some(PriorTarget::from(&acquire_prior(
            &RecordedResponses::new(&dirs[0]),
            names,
            None,
            on_unparseable,
        )?)),
        PriorConfig::Http { url, .. } => {
            let source = HttpPriorSource::new(url, std::time::Duration::from_secs(60), 3);
            Some(PriorTarget::from(&acquire_prior(
                &source,
                names,
                None,
                UnparseablePolicy::default(),
            )?))
        }
    })
}

fn discover(args: DiscoverArgs) -> Result<u8> {
    let ds = load_csv_dataset(&args.data, args.solver.standardize)?;
    let prior = match &args.solver.prior {
        Some(text) => load_prior_target(text, ds.names(), args.seed)?,
        None => None,
    };
    let mut cfg = match (&args.solver.preset, &args.solver.config) {
        (Some(name), _) => SolverConfig::preset(name).map_err(|e| usage(e.to_string()))?,
        (None, Some(path)) => read_json(path)?,
        (None, None) if prior.is_some() => SolverConfig::with_prior_defaults(),
        (None, None) => SolverConfig::default(),
    };
    if let Some(tau) = args.solver.threshold {
        cfg.threshold_tau = tau;
    }
    cfg.seed = args.seed;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let out = solve(&ds, prior.as_ref(), &cfg)?;
    let graph = out.threshold(cfg.threshold_tau, ds.names())?;
    std::fs::create_dir_all(&args.out)?;
    write_json(&args.out.join("w.json"), &out.record(ds.names(), &cfg))?;
    write_json(&args.out.join("graph.json"), &graph)?;
    println!(
        "{} edges at tau {}; h {:.3e}; converged {}",
        graph.edge_count(),
        cfg.threshold_tau,
        out.h_final,
        out.converged
    );
    Ok(if out.converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn print_metrics(m: &MetricsReport) {
    println!("{}", MetricsReport::HEADER.join("\t"));
    println!("{}", m.row().join("\t"));
}

fn evaluate_command(args: EvaluateArgs) -> Result<u8> {
    let pred: DirectedGraph = read_json(&args.pred)?;
    let truth: DirectedGraph = read_json(&args.truth)?;
    let m = evaluate(&pred, &truth)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&m)?);
    } else {
        print_metrics(&m);
    }
    Ok(0)
}

fn run(args: RunArgs) -> Result<u8> {
    let path = args
        .solver
        .config
        .as_ref()
        .ok_or_else(|| usage("`run` needs --config <experiment.json>"))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(p) = args.solver.preset {
        cfg.preset = Some(p);
        cfg.solver = None;
    }
    if let Some(t) = args.solver.threshold {
        cfg.threshold = Some(t);
    }
    if args.solver.standardize {
        cfg.standardize = true;
    }
    if let Some(p) = &args.solver.prior {
        cfg.prior = parse_prior(p)?;
    }
    if let Some(s) = args.seed {
        cfg.seeds = vec![s];
    }
    if let Some(range) = &args.seeds {
        cfg.seeds = parse_seeds(range)?;
    }
    if let Some(out) = args.out {
        cfg.output_dir = Some(out);
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let report = run_experiment(&cfg)?;
    println!("run\t{}", MetricsReport::HEADER.join("\t"));
    for r in &report.runs {
        println!("{}\t{}", r.run, r.metrics.row().join("\t"));
    }
    let mean = |k: &str| {
        report.aggregate[k]
            .mean
            .map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
    };
    println!(
        "mean\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        mean("nhd"),
        mean("nhd_ratio"),
        mean("shd"),
        mean("edge_count_pred"),
        mean("fdr"),
        mean("fpr"),
        mean("tpr")
    );
    if report.non_converged > 0 {
        eprintln!(
            "{} of {} runs did not converge",
            report.non_converged,
            report.runs.len()
        );
    }
    Ok(if report.non_converged == report.runs.len() {
        EXIT_NOT_CONVERGED
    } else {
        0
    })
}

fn compare_command(args: CompareArgs) -> Result<u8> {
    let a: ExperimentReport = read_json(&args.baseline)?;
    let b: ExperimentReport = read_json(&args.candidate)?;
    let table = compare(&a, &b)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&table)?);
    } else {
        print!("{table}");
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Prior(c) => prior_command(c),
        Command::Discover(a) => discover(a),
        Command::Evaluate(a) => evaluate_command(a),
        Command::Run(a) => run(a),
        Command::Compare(a) => compare_command(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            // library errors already embed their cause in the message
            let mut msg = String::new();
            for cause in e.chain() {
                let text = cause.to_string();
                if !msg.contains(&text) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&text);
                }
            }
            eprintln!("error: {msg}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_DATA)
            }
        }
    }
}
