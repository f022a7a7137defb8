//! Experiment orchestration: build or load data, acquire a prior, solve,
//! threshold and evaluate for every seed, then aggregate.
//!
//! Runs execute as independent rayon jobs. Each run writes its own
//! directory; the report is folded in job order afterwards, so the same
//! config always produces the same report bytes.

mod names;
mod report;

pub use names::{expand_names, SACHS_PROMPT_NAMES};
pub use report::{
    aggregate, compare, compare_aggregates, AggregateStat, Change, DeltaRow, DeltaTable,
    ExperimentReport, Provenance, RunRecord, METRIC_DIRECTIONS,
};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::metrics::evaluate;
use crate::prior::{
    acquire_prior, aggregate_mean, certainty, random_prior, CertaintyMatrix, HttpPriorSource,
    MeanPrior, PriorMatrix, RecordedResponses, UnparseablePolicy,
};
use crate::solver::{solve, PriorTarget, SolverConfig};
use crate::synthetic::{
    build_motivating_scenario, build_physics_graph, motivating_graph, sample_linear_sem, Dataset,
    SemSpec, PHYSICS_LONG_NAMES, PHYSICS_NOISE_VARIANCE, PHYSICS_SAMPLE_COUNT,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinGraph {
    Physics3,
    Physics5,
    Physics7,
    Motivating,
}

impl BuiltinGraph {
    pub const ALL: [BuiltinGraph; 4] = [
        BuiltinGraph::Physics3,
        BuiltinGraph::Physics5,
        BuiltinGraph::Physics7,
        BuiltinGraph::Motivating,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinGraph::Physics3 => "physics3",
            BuiltinGraph::Physics5 => "physics5",
            BuiltinGraph::Physics7 => "physics7",
            BuiltinGraph::Motivating => "motivating",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.name() == name)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown graph `{name}`; expected physics3, physics5, physics7 or motivating"
                ))
            })
    }

    pub fn graph(self) -> Result<DirectedGraph> {
        match self {
            BuiltinGraph::Physics3 => build_physics_graph(3),
            BuiltinGraph::Physics5 => build_physics_graph(5),
            BuiltinGraph::Physics7 => build_physics_graph(7),
            BuiltinGraph::Motivating => motivating_graph(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    /// Linear SEM on a built-in graph with default coefficients; the seed of
    /// each run drives both coefficients and noise. The motivating scenario
    /// has fixed coefficients and noise and ignores nothing but the seed.
    Synthetic {
        graph: BuiltinGraph,
        sample_count: Option<usize>,
        noise_variance: Option<f64>,
    },
    Csv {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundTruthSource {
    Builtin { graph: BuiltinGraph },
    Json { path: PathBuf },
}

fn one() -> usize {
    1
}

fn default_timeout() -> u64 {
    60
}

fn default_credential_header() -> String {
    "Authorization".to_string()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorConfig {
    #[default]
    None,
    /// The ground-truth graph itself.
    GroundTruth,
    /// A `PriorMatrix` or `MeanPrior` JSON file.
    Json { path: PathBuf },
    /// One recorded-response directory per repeated run; several are
    /// averaged.
    Recorded {
        dirs: Vec<PathBuf>,
        #[serde(default)]
        on_unparseable: UnparseablePolicy,
    },
    Http {
        url: String,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
        /// Transport attempts per request.
        #[serde(default = "one")]
        retries: usize,
        /// Environment variable holding the credential header value.
        credential_env: Option<String>,
        #[serde(default = "default_credential_header")]
        credential_header: String,
        #[serde(default)]
        on_unparseable: UnparseablePolicy,
        /// Independent acquisitions, averaged when more than one.
        #[serde(default = "one")]
        repeats: usize,
    },
    /// `repeats` uniformly random priors with `edge_count` edges per seed.
    Random {
        edge_count: usize,
        #[serde(default = "one")]
        repeats: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NameTable {
    Physics,
    Sachs,
}

/// Names substituted into prompts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PromptNames {
    Table(NameTable),
    Map(BTreeMap<String, String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub dataset: DatasetSource,
    /// Required for CSV data; synthetic data defaults to its generating
    /// graph.
    #[serde(default)]
    pub ground_truth: Option<GroundTruthSource>,
    #[serde(default)]
    pub prior: PriorConfig,
    /// Defaults to the long physics names for built-in physics graphs.
    #[serde(default)]
    pub prompt_names: Option<PromptNames>,
    /// Named solver preset; exclusive with `solver`.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub solver: Option<SolverConfig>,
    /// Overrides the solver's `threshold_tau`.
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub standardize: bool,
    /// When set and the prior is an average of several runs, attach a
    /// certainty matrix with this epsilon.
    #[serde(default)]
    pub certainty_epsilon: Option<f64>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a CSV with a header row, optionally standardizing every column.
pub fn load_csv_dataset(path: &Path, standardize: bool) -> Result<Dataset<f64>> {
    let ds = Dataset::load_csv(path)?;
    if standardize {
        ds.standardized()
    } else {
        Ok(ds)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the `repeat`-th random prior drawn for run seed `seed`.
pub fn random_prior_seed(seed: u64, repeat: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ repeat as u64)
}

impl ExperimentConfig {
    /// Loads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: Self = read_json(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let DatasetSource::Csv { path } = &mut self.dataset {
            fix(path);
        }
        if let Some(GroundTruthSource::Json { path }) = &mut self.ground_truth {
            fix(path);
        }
        match &mut self.prior {
            PriorConfig::Json { path } => fix(path),
            PriorConfig::Recorded { dirs, .. } => dirs.iter_mut().for_each(fix),
            _ => {}
        }
        if let Some(out) = &mut self.output_dir {
            fix(out);
        }
    }

    /// SHA-256 of the JSON encoding, hex.
    pub fn hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect())
    }

    /// Solver settings after applying the preset and threshold override.
    /// Without either `preset` or `solver`, runs with a prior use the
    /// prior-integrated defaults and runs without one the plain defaults.
    pub fn resolved_solver(&self) -> Result<SolverConfig> {
        let mut cfg = match (&self.preset, &self.solver) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidArgument(
                    "give either `preset` or `solver`, not both".into(),
                ))
            }
            (Some(name), None) => SolverConfig::preset(name)?,
            (None, Some(cfg)) => cfg.clone(),
            (None, None) if self.prior == PriorConfig::None => SolverConfig::default(),
            (None, None) => SolverConfig::with_prior_defaults(),
        };
        if let Some(tau) = self.threshold {
            cfg.threshold_tau = tau;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidArgument("`seeds` must not be empty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(s) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(Error::InvalidArgument(format!("seed {s} listed twice")));
        }
        match &self.dataset {
            DatasetSource::Csv { .. } if self.ground_truth.is_none() => {
                return Err(Error::InvalidArgument(
                    "a CSV dataset needs a `ground_truth`".into(),
                ))
            }
            DatasetSource::Synthetic {
                graph: BuiltinGraph::Motivating,
                sample_count,
                noise_variance,
            } if sample_count.is_some() || noise_variance.is_some() => {
                return Err(Error::InvalidArgument(
                    "the motivating scenario has fixed sample count and noise".into(),
                ))
            }
            DatasetSource::Synthetic {
                sample_count: Some(0),
                ..
            } => {
                return Err(Error::InvalidArgument(
                    "sample_count must be positive".into(),
                ))
            }
            DatasetSource::Synthetic {
                noise_variance: Some(v),
                ..
            } if !(*v >= 0.0 && v.is_finite()) => {
                return Err(Error::InvalidArgument(format!(
                    "noise variance {v} is invalid"
                )))
            }
            _ => {}
        }
        match &self.prior {
            PriorConfig::Recorded { dirs, .. } if dirs.is_empty() => {
                return Err(Error::InvalidArgument("`dirs` must not be empty".into()))
            }
            PriorConfig::Http { repeats: 0, .. } | PriorConfig::Random { repeats: 0, .. } => {
                return Err(Error::InvalidArgument("`repeats` must be positive".into()))
            }
            _ => {}
        }
        if let Some(eps) = self.certainty_epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "certainty_epsilon {eps} must be > 0"
                )));
            }
        }
        self.resolved_solver()?;
        Ok(())
    }

    fn variable_names(&self, csv: Option<&Dataset<f64>>) -> Result<Vec<String>> {
        match (&self.dataset, csv) {
            (_, Some(ds)) => Ok(ds.names().to_vec()),
            (DatasetSource::Synthetic { graph, .. }, None) => Ok(graph.graph()?.names().to_vec()),
            (DatasetSource::Csv { .. }, None) => unreachable!("csv data is loaded up front"),
        }
    }

    fn prompt_names(&self, names: &[String]) -> Option<Vec<String>> {
        match &self.prompt_names {
            Some(PromptNames::Table(NameTable::Physics)) => {
                Some(expand_names(names, PHYSICS_LONG_NAMES))
            }
            Some(PromptNames::Table(NameTable::Sachs)) => {
                Some(expand_names(names, SACHS_PROMPT_NAMES))
            }
            Some(PromptNames::Map(map)) => Some(expand_names(
                names,
                map.iter().map(|(k, v)| (k.as_str(), v.as_str())),
            )),
            None => match self.dataset {
                DatasetSource::Synthetic {
                    graph: BuiltinGraph::Physics3 | BuiltinGraph::Physics5 | BuiltinGraph::Physics7,
                    ..
                } => Some(expand_names(names, PHYSICS_LONG_NAMES)),
                _ => None,
            },
        }
    }
}

/// Prior after acquisition, shared by every run.
#[derive(Clone, Debug)]
enum FixedPrior {
    Binary(PriorMatrix),
    Mean(MeanPrior, Option<CertaintyMatrix>),
}

impl FixedPrior {
    fn from_runs(runs: Vec<PriorMatrix>, epsilon: Option<f64>) -> Result<Self> {
        if runs.len() == 1 {
            return Ok(FixedPrior::Binary(
                runs.into_iter().next().expect("one run"),
            ));
        }
        let mean = aggregate_mean(&runs)?;
        let c = epsilon.map(|eps| certainty(&runs, eps)).transpose()?;
        Ok(FixedPrior::Mean(mean, c))
    }

    fn names(&self) -> &[String] {
        match self {
            FixedPrior::Binary(p) => p.names(),
            FixedPrior::Mean(m, _) => m.names(),
        }
    }

    fn target(&self) -> Result<PriorTarget<f64>> {
        match self {
            FixedPrior::Binary(p) => Ok(PriorTarget::from(p)),
            FixedPrior::Mean(m, None) => Ok(PriorTarget::from(m)),
            FixedPrior::Mean(m, Some(c)) => PriorTarget::from(m).with_certainty(c),
        }
    }

    fn write(&self, dir: &Path) -> Result<()> {
        match self {
            FixedPrior::Binary(p) => write_json(&dir.join("prior.json"), p),
            FixedPrior::Mean(m, c) => {
                write_json(&dir.join("prior.json"), m)?;
                if let Some(c) = c {
                    write_json(&dir.join("certainty.json"), c)?;
                }
                Ok(())
            }
        }
    }
}

fn load_prior_file(path: &Path) -> Result<FixedPrior> {
    let value: serde_json::Value = read_json(path)?;
    if value.get("run_count").is_some() {
        Ok(FixedPrior::Mean(serde_json::from_value(value)?, None))
    } else {
        Ok(FixedPrior::Binary(serde_json::from_value(value)?))
    }
}

#[derive(Clone, Copy, Debug)]
struct Job {
    seed: u64,
    repeat: Option<usize>,
}

impl Job {
    fn dir_name(&self) -> String {
        match self.repeat {
            Some(r) => format!("seed-{}-prior-{r}", self.seed),
            None => format!("seed-{}", self.seed),
        }
    }
}

#[derive(Serialize)]
struct RunConfig<'a> {
    seed: u64,
    repeat: Option<usize>,
    prior_seed: Option<u64>,
    threshold: f64,
    solver: &'a SolverConfig,
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    solver: SolverConfig,
    csv: Option<Dataset<f64>>,
    fixed_truth: Option<DirectedGraph>,
    prior: Option<FixedPrior>,
}

impl Context<'_> {
    fn data_for(&self, seed: u64) -> Result<(Dataset<f64>, DirectedGraph)> {
        let (ds, generating) = match (&self.cfg.dataset, &self.csv) {
            (_, Some(ds)) => (ds.clone(), None),
            (
                DatasetSource::Synthetic {
                    graph: BuiltinGraph::Motivating,
                    ..
                },
                None,
            ) => {
                let (g, ds) = build_motivating_scenario(seed)?;
                (ds, Some(g))
            }
            (
                DatasetSource::Synthetic {
                    graph,
                    sample_count,
                    noise_variance,
                },
                None,
            ) => {
                let g = graph.graph()?;
                let spec = SemSpec::<f64>::with_default_weights(
                    g.clone(),
                    noise_variance.unwrap_or(PHYSICS_NOISE_VARIANCE),
                    sample_count.unwrap_or(PHYSICS_SAMPLE_COUNT),
                    seed,
                )?;
                (sample_linear_sem(&spec)?, Some(g))
            }
            (DatasetSource::Csv { .. }, None) => unreachable!("csv data is loaded up front"),
        };
        let ds = if self.cfg.standardize && self.csv.is_none() {
            ds.standardized()?
        } else {
            ds
        };
        let truth = match (&self.fixed_truth, generating) {
            (Some(t), _) => t.clone(),
            (None, Some(g)) => g,
            (None, None) => unreachable!("validated: csv data has a ground truth"),
        };
        if truth.names() != ds.names() {
            return Err(Error::NameMismatch);
        }
        Ok((ds, truth))
    }

    fn run(&self, job: Job) -> Result<RunRecord> {
        let (ds, truth) = self.data_for(job.seed)?;
        let mut prior_seed = None;
        let prior = match (&self.cfg.prior, &self.prior) {
            (PriorConfig::None, _) => None,
            (PriorConfig::GroundTruth, _) => {
                Some(FixedPrior::Binary(PriorMatrix::from_graph(truth.clone())))
            }
            (PriorConfig::Random { edge_count, .. }, _) => {
                let s = random_prior_seed(job.seed, job.repeat.unwrap_or(0));
                prior_seed = Some(s);
                Some(FixedPrior::Binary(random_prior(
                    ds.dim(),
                    *edge_count,
                    ds.names(),
                    s,
                )?))
            }
            (_, Some(p)) => Some(p.clone()),
            (_, None) => unreachable!("acquired before the jobs start"),
        };
        if let Some(p) = &prior {
            if p.names() != ds.names() {
                return Err(Error::NameMismatch);
            }
        }
        let target = prior.as_ref().map(FixedPrior::target).transpose()?;
        let out = solve(&ds, target.as_ref(), &self.solver)?;
        let tau = self.solver.threshold_tau;
        let pred = out.threshold(tau, ds.names())?;
        let metrics = evaluate(&pred, &truth)?;
        if !out.converged {
            log::warn!(
                "{}: outer budget exhausted with h = {:.3e}",
                job.dir_name(),
                out.h_final
            );
        }

        if let Some(root) = &self.cfg.output_dir {
            let dir = root.join(job.dir_name());
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let run_cfg = RunConfig {
                seed: job.seed,
                repeat: job.repeat,
                prior_seed,
                threshold: tau,
                solver: &self.solver,
            };
            write_json(&dir.join("config.json"), &run_cfg)?;
            if let Some(p) = &prior {
                p.write(&dir)?;
            }
            write_json(&dir.join("w.json"), &out.record(ds.names(), &self.solver))?;
            write_json(&dir.join("graph.json"), &pred)?;
            write_json(&dir.join("metrics.json"), &metrics)?;
            let mut log = String::new();
            for e in &out.state.history {
                log.push_str(&format!(
                    "outer {} objective {:.9e} h {:.3e} rho {:.1e} alpha {:.6e} inner {}\n",
                    e.iteration, e.objective, e.h, e.rho, e.alpha, e.inner_iterations
                ));
            }
            log.push_str(&format!(
                "converged {} h_final {:.3e} edges {}\n{}\n",
                out.converged,
                out.h_final,
                pred.edge_count(),
                metrics
            ));
            let path = dir.join("log.txt");
            std::fs::write(&path, log).map_err(|e| Error::io(&path, e))?;
        }

        Ok(RunRecord {
            run: job.dir_name(),
            seed: job.seed,
            repeat: job.repeat,
            prior_seed,
            converged: out.converged,
            h_final: out.h_final,
            outer_iterations: out.state.history.len(),
            metrics,
        })
    }
}

fn acquire_fixed_prior(cfg: &ExperimentConfig, names: &[String]) -> Result<Option<FixedPrior>> {
    let prompt_names = cfg.prompt_names(names);
    let prompt_names = prompt_names.as_deref();
    match &cfg.prior {
        PriorConfig::None | PriorConfig::GroundTruth | PriorConfig::Random { .. } => Ok(None),
        PriorConfig::Json { path } => load_prior_file(path).map(Some),
        PriorConfig::Recorded {
            dirs,
            on_unparseable,
        } => {
            let runs = dirs
                .iter()
                .map(|d| {
                    acquire_prior(
                        &RecordedResponses::new(d),
                        names,
                        prompt_names,
                        *on_unparseable,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            FixedPrior::from_runs(runs, cfg.certainty_epsilon).map(Some)
        }
        PriorConfig::Http {
            url,
            timeout_secs,
            retries,
            credential_env,
            credential_header,
            on_unparseable,
            repeats,
        } => {
            let mut source =
                HttpPriorSource::new(url.clone(), Duration::from_secs(*timeout_secs), *retries);
            if let Some(var) = credential_env {
                let value = std::env::var(var).map_err(|_| {
                    Error::PriorSource(format!("environment variable {var} is not set"))
                })?;
                source = source.with_header(credential_header.clone(), value);
            }
            let runs = (0..*repeats)
                .map(|_| acquire_prior(&source, names, prompt_names, *on_unparseable))
                .collect::<Result<Vec<_>>>()?;
            FixedPrior::from_runs(runs, cfg.certainty_epsilon).map(Some)
        }
    }
}

/// Runs every seed (and every random-prior repeat) and aggregates.
///
/// Solver non-convergence is recorded per run and counted in
/// `non_converged`; it does not abort the experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let solver = cfg.resolved_solver()?;
    let csv = match &cfg.dataset {
        DatasetSource::Csv { path } => Some(load_csv_dataset(path, cfg.standardize)?),
        DatasetSource::Synthetic { .. } => None,
    };
    let fixed_truth = match &cfg.ground_truth {
        None => None,
        Some(GroundTruthSource::Builtin { graph }) => Some(graph.graph()?),
        Some(GroundTruthSource::Json { path }) => Some(read_json::<DirectedGraph>(path)?),
    };
    let names = cfg.variable_names(csv.as_ref())?;
    if let Some(t) = &fixed_truth {
        if t.names() != names.as_slice() {
            return Err(Error::NameMismatch);
        }
    }
    let prior = acquire_fixed_prior(cfg, &names)?;
    if let Some(root) = &cfg.output_dir {
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    }

    let repeats = match cfg.prior {
        PriorConfig::Random { repeats, .. } => Some(repeats),
        _ => None,
    };
    let jobs: Vec<Job> = cfg
        .seeds
        .iter()
        .flat_map(|&seed| match repeats {
            Some(n) => (0..n)
                .map(|r| Job {
                    seed,
                    repeat: Some(r),
                })
                .collect::<Vec<_>>(),
            None => vec![Job { seed, repeat: None }],
        })
        .collect();

    let ctx = Context {
        cfg,
        solver: solver.clone(),
        csv,
        fixed_truth,
        prior,
    };
    let runs: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&job| ctx.run(job))
        .collect::<Result<_>>()?;

    let report = ExperimentReport {
        name: cfg.name.clone(),
        aggregate: aggregate(&runs),
        non_converged: runs.iter().filter(|r| !r.converged).count(),
        provenance: Provenance {
            config_hash: cfg.hash()?,
            seeds: cfg.seeds.clone(),
            preset: cfg.preset.clone(),
            threshold: solver.threshold_tau,
            solver,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        runs,
    };
    if let Some(root) = &cfg.output_dir {
        write_json(&root.join("report.json"), &report)?;
    }
    Ok(report)
}
