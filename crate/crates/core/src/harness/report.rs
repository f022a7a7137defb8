//! Experiment reports, aggregation over runs and baseline comparison.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::solver::SolverConfig;

/// One solve within an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Directory name of the run's artifacts.
    pub run: String,
    pub seed: u64,
    /// Index among the random priors drawn for this seed.
    pub repeat: Option<usize>,
    pub prior_seed: Option<u64>,
    pub converged: bool,
    pub h_final: f64,
    pub outer_iterations: usize,
    pub metrics: MetricsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStat {
    /// Mean over runs where the metric is defined; `None` if it never is.
    pub mean: Option<f64>,
    /// Population standard deviation over the same runs.
    pub std: Option<f64>,
    /// Number of runs contributing.
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the experiment config's JSON encoding.
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub preset: Option<String>,
    pub solver: SolverConfig,
    pub threshold: f64,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: Option<String>,
    pub runs: Vec<RunRecord>,
    pub aggregate: BTreeMap<String, AggregateStat>,
    pub non_converged: usize,
    pub provenance: Provenance,
}

/// Metric keys in table order, with `true` where larger is better and
/// `None` for columns with no preferred direction.
pub const METRIC_DIRECTIONS: [(&str, Option<bool>); 8] = [
    ("nhd", Some(false)),
    ("nhd_ratio", Some(false)),
    ("shd", Some(false)),
    ("edge_count_pred", None),
    ("edge_count_true", None),
    ("fdr", Some(false)),
    ("fpr", Some(false)),
    ("tpr", Some(true)),
];

fn metric_values(m: &MetricsReport) -> [(&'static str, Option<f64>); 8] {
    [
        ("nhd", Some(m.nhd)),
        ("nhd_ratio", Some(m.nhd_ratio)),
        ("shd", Some(m.shd as f64)),
        ("edge_count_pred", Some(m.edge_count_pred as f64)),
        ("edge_count_true", Some(m.edge_count_true as f64)),
        ("fdr", m.fdr),
        ("fpr", m.fpr),
        ("tpr", m.tpr),
    ]
}

/// Mean and population standard deviation per metric, skipping undefined
/// values.
pub fn aggregate(runs: &[RunRecord]) -> BTreeMap<String, AggregateStat> {
    let mut columns: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (name, _) in METRIC_DIRECTIONS {
        columns.insert(name, Vec::new());
    }
    for r in runs {
        for (name, v) in metric_values(&r.metrics) {
            if let Some(v) = v {
                columns.get_mut(name).expect("known metric").push(v);
            }
        }
    }
    columns
        .into_iter()
        .map(|(name, vals)| {
            let stat = if vals.is_empty() {
                AggregateStat {
                    mean: None,
                    std: None,
                    count: 0,
                }
            } else {
                let n = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / n;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                AggregateStat {
                    mean: Some(mean),
                    std: Some(var.sqrt()),
                    count: vals.len(),
                }
            };
            (name.to_string(), stat)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Change {
    Improvement,
    Regression,
    Unchanged,
    /// The metric has no preferred direction.
    Neutral,
    /// One side is undefined.
    Undefined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub metric: String,
    pub baseline: Option<f64>,
    pub candidate: Option<f64>,
    /// `candidate - baseline`.
    pub delta: Option<f64>,
    pub change: Change,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaTable {
    pub rows: Vec<DeltaRow>,
}

fn classify(delta: f64, higher_is_better: Option<bool>) -> Change {
    match higher_is_better {
        None => Change::Neutral,
        Some(_) if delta == 0.0 => Change::Unchanged,
        Some(up) if (delta > 0.0) == up => Change::Improvement,
        Some(_) => Change::Regression,
    }
}

/// Per-metric difference of aggregate means, `candidate - baseline`.
pub fn compare(baseline: &ExperimentReport, candidate: &ExperimentReport) -> Result<DeltaTable> {
    compare_aggregates(&baseline.aggregate, &candidate.aggregate)
}

pub fn compare_aggregates(
    baseline: &BTreeMap<String, AggregateStat>,
    candidate: &BTreeMap<String, AggregateStat>,
) -> Result<DeltaTable> {
    let a: Vec<&String> = baseline.keys().collect();
    let b: Vec<&String> = candidate.keys().collect();
    if a != b {
        return Err(Error::MetricSetMismatch(format!("{a:?} vs {b:?}")));
    }
    let mut rows = Vec::new();
    for (metric, direction) in METRIC_DIRECTIONS {
        let (Some(x), Some(y)) = (baseline.get(metric), candidate.get(metric)) else {
            continue;
        };
        let delta = x.mean.zip(y.mean).map(|(x, y)| y - x);
        let change = delta.map_or(Change::Undefined, |d| classify(d, direction));
        rows.push(DeltaRow {
            metric: metric.to_string(),
            baseline: x.mean,
            candidate: y.mean,
            delta,
            change,
        });
    }
    for key in baseline.keys() {
        if !METRIC_DIRECTIONS.iter().any(|(m, _)| m == key) {
            return Err(Error::MetricSetMismatch(format!("unknown metric `{key}`")));
        }
    }
    Ok(DeltaTable { rows })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
}

impl fmt::Display for DeltaTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16}{:>10}{:>18}", "metric", "baseline", "candidate")?;
        for r in &self.rows {
            let marker = match (r.delta, r.change) {
                (Some(d), Change::Improvement | Change::Regression | Change::Neutral)
                    if d != 0.0 =>
                {
                    let arrow = if d < 0.0 { '▼' } else { '▲' };
                    format!(" ({arrow}{:.2})", d.abs())
                }
                _ => String::new(),
            };
            let candidate = format!("{}{marker}", fmt_opt(r.candidate));
            writeln!(
                f,
                "{:<16}{:>10}{:>18}",
                r.metric,
                fmt_opt(r.baseline),
                candidate
            )?;
        }
        Ok(())
    }
}
