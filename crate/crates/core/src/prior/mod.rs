//! Language-model prior knowledge: pairwise verdicts, the binary prior
//! matrix, averaged priors over repeated runs and per-edge certainty.

mod prompt;
mod source;

pub use prompt::{parse_response, render_prompt, Answer, CLOSE_TAG, OPEN_TAG};
pub use source::{
    acquire_prior, HttpPriorSource, PriorSource, RecordedResponses, UnparseablePolicy,
};

use std::collections::HashSet;
use std::path::Path;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{validate_names, DirectedGraph};
use crate::matrix::{from_rows, to_rows};

/// Outcome of one pairwise question.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub var_a: String,
    pub var_b: String,
    pub answer: Answer,
}

impl PairVerdict {
    pub fn new(var_a: impl Into<String>, var_b: impl Into<String>, answer: Answer) -> Result<Self> {
        let (var_a, var_b) = (var_a.into(), var_b.into());
        if var_a == var_b {
            return Err(Error::InvalidArgument(format!(
                "verdict pairs `{var_a}` with itself"
            )));
        }
        Ok(Self {
            var_a,
            var_b,
            answer,
        })
    }
}

/// Binary prior adjacency. Unlike a learned graph it may contain 2-cycles
/// and longer cycles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriorMatrix {
    graph: DirectedGraph,
}

impl PriorMatrix {
    pub fn from_graph(graph: DirectedGraph) -> Self {
        Self { graph }
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn names(&self) -> &[String] {
        self.graph.names()
    }

    pub fn dim(&self) -> usize {
        self.graph.dim()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Entries as `0.0`/`1.0`.
    pub fn values(&self) -> Array2<f64> {
        self.graph.adjacency().mapv(|e| if e { 1.0 } else { 0.0 })
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Elementwise average of repeated binary priors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeanPriorRepr", into = "MeanPriorRepr")]
pub struct MeanPrior {
    names: Vec<String>,
    k_mean: Array2<f64>,
    run_count: usize,
}

#[derive(Serialize, Deserialize)]
struct MeanPriorRepr {
    names: Vec<String>,
    adj: Vec<Vec<f64>>,
    run_count: usize,
}

impl TryFrom<MeanPriorRepr> for MeanPrior {
    type Error = Error;

    fn try_from(r: MeanPriorRepr) -> Result<Self> {
        validate_names(&r.names)?;
        let k_mean = from_rows(&r.adj, "mean prior")?;
        let d = r.names.len();
        if k_mean.dim() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "mean prior is not {d}x{d}"
            )));
        }
        if k_mean.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(
                "mean prior entries must lie in [0, 1]".into(),
            ));
        }
        if k_mean.diag().iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidArgument(
                "mean prior diagonal must be zero".into(),
            ));
        }
        if r.run_count == 0 {
            return Err(Error::InvalidArgument("run_count must be positive".into()));
        }
        Ok(Self {
            names: r.names,
            k_mean,
            run_count: r.run_count,
        })
    }
}

impl From<MeanPrior> for MeanPriorRepr {
    fn from(m: MeanPrior) -> Self {
        MeanPriorRepr {
            adj: to_rows(&m.k_mean.view()),
            names: m.names,
            run_count: m.run_count,
        }
    }
}

impl MeanPrior {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.k_mean
    }

    pub fn run_count(&self) -> usize {
        self.run_count
    }
}

/// Per-edge certainty `eps / (sqrt(Var[K_ij]) + eps)` across repeated priors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CertaintyRepr", into = "CertaintyRepr")]
pub struct CertaintyMatrix {
    names: Vec<String>,
    c: Array2<f64>,
}

#[derive(Serialize, Deserialize)]
struct CertaintyRepr {
    names: Vec<String>,
    c: Vec<Vec<f64>>,
}

impl TryFrom<CertaintyRepr> for CertaintyMatrix {
    type Error = Error;

    fn try_from(r: CertaintyRepr) -> Result<Self> {
        validate_names(&r.names)?;
        let c = from_rows(&r.c, "certainty")?;
        let d = r.names.len();
        if c.dim() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "certainty is not {d}x{d}"
            )));
        }
        if c.iter().any(|v| !(*v > 0.0 && *v <= 1.0)) {
            return Err(Error::InvalidArgument(
                "certainty entries must lie in (0, 1]".into(),
            ));
        }
        Ok(Self { names: r.names, c })
    }
}

impl From<CertaintyMatrix> for CertaintyRepr {
    fn from(m: CertaintyMatrix) -> Self {
        CertaintyRepr {
            c: to_rows(&m.c.view()),
            names: m.names,
        }
    }
}

impl CertaintyMatrix {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.c
    }
}

/// Folds verdicts into a prior. A sets `a -> b`, B sets `b -> a`, C sets
/// both and D (or a pair never asked) sets neither.
pub fn assemble_prior(verdicts: &[PairVerdict], names: &[String]) -> Result<PriorMatrix> {
    let mut g = DirectedGraph::empty(names.iter().cloned())?;
    let mut seen = HashSet::new();
    for v in verdicts {
        let a = g.index_of(&v.var_a)?;
        let b = g.index_of(&v.var_b)?;
        if a == b {
            return Err(Error::InvalidArgument(format!(
                "verdict pairs `{}` with itself",
                v.var_a
            )));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(Error::DuplicatePair(v.var_a.clone(), v.var_b.clone()));
        }
        let (forward, backward) = v.answer.edges();
        if forward {
            g.add_edge(a, b)?;
        }
        if backward {
            g.add_edge(b, a)?;
        }
    }
    Ok(PriorMatrix::from_graph(g))
}

fn common_names(priors: &[PriorMatrix]) -> Result<&[String]> {
    let first = priors
        .first()
        .ok_or_else(|| Error::InvalidArgument("at least one prior is required".into()))?;
    if priors.iter().any(|p| p.names() != first.names()) {
        return Err(Error::NameMismatch);
    }
    Ok(first.names())
}

/// Elementwise mean over repeated priors.
pub fn aggregate_mean(priors: &[PriorMatrix]) -> Result<MeanPrior> {
    let names = common_names(priors)?.to_vec();
    let d = names.len();
    let mut counts = Array2::<usize>::zeros((d, d));
    for p in priors {
        for (i, j) in p.graph().edges() {
            counts[(i, j)] += 1;
        }
    }
    let runs = priors.len();
    Ok(MeanPrior {
        names,
        k_mean: counts.mapv(|c| c as f64 / runs as f64),
        run_count: runs,
    })
}

/// Certainty from the population variance of each entry across `priors`.
pub fn certainty(priors: &[PriorMatrix], epsilon: f64) -> Result<CertaintyMatrix> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let mean = aggregate_mean(priors)?;
    let runs = priors.len() as f64;
    let mut sq = Array2::<f64>::zeros(mean.k_mean.dim());
    for p in priors {
        let v = p.values();
        sq.zip_mut_with(&(&v - &mean.k_mean), |acc, dev| *acc += dev * dev);
    }
    let c = sq.mapv(|s| epsilon / ((s / runs).sqrt() + epsilon));
    Ok(CertaintyMatrix {
        names: mean.names,
        c,
    })
}

/// `edge_count` distinct off-diagonal cells chosen uniformly without
/// replacement. Never looks at any ground truth.
pub fn random_prior(
    d: usize,
    edge_count: usize,
    names: &[String],
    seed: u64,
) -> Result<PriorMatrix> {
    if names.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "{} names for dimension {d}",
            names.len()
        )));
    }
    let cells = d * d.saturating_sub(1);
    if edge_count > cells {
        return Err(Error::EdgeCountOutOfRange {
            count: edge_count,
            max: cells,
        });
    }
    let mut g = DirectedGraph::empty(names.iter().cloned())?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for k in rand::seq::index::sample(&mut rng, cells, edge_count) {
        let i = k / (d - 1);
        let mut j = k % (d - 1);
        if j >= i {
            j += 1;
        }
        g.add_edge(i, j)?;
    }
    Ok(PriorMatrix::from_graph(g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn answer_patterns() {
        let n = names(&["SAT", "ER"]);
        let k = |a| assemble_prior(&[PairVerdict::new("SAT", "ER", a).unwrap()], &n).unwrap();
        assert_eq!(
            k(Answer::A).graph().adjacency_rows(),
            vec![vec![0, 1], vec![0, 0]]
        );
        assert_eq!(
            k(Answer::B).graph().adjacency_rows(),
            vec![vec![0, 0], vec![1, 0]]
        );
        assert_eq!(
            k(Answer::C).graph().adjacency_rows(),
            vec![vec![0, 1], vec![1, 0]]
        );
        assert_eq!(k(Answer::D).edge_count(), 0);
        assert_eq!(assemble_prior(&[], &n).unwrap().edge_count(), 0);
    }

    #[test]
    fn assemble_errors() {
        let n = names(&["a", "b", "c"]);
        let dup = [
            PairVerdict::new("a", "b", Answer::A).unwrap(),
            PairVerdict::new("b", "a", Answer::B).unwrap(),
        ];
        assert!(matches!(
            assemble_prior(&dup, &n),
            Err(Error::DuplicatePair(..))
        ));
        let unknown = [PairVerdict::new("a", "z", Answer::A).unwrap()];
        assert!(matches!(
            assemble_prior(&unknown, &n),
            Err(Error::UnknownName(_))
        ));
        assert!(PairVerdict::new("a", "a", Answer::A).is_err());
    }

    #[test]
    fn aggregate_and_certainty() {
        let n = names(&["a", "b"]);
        let p1 = assemble_prior(&[PairVerdict::new("a", "b", Answer::A).unwrap()], &n).unwrap();
        let p0 = assemble_prior(&[], &n).unwrap();
        let single = aggregate_mean(std::slice::from_ref(&p1)).unwrap();
        assert_eq!(single.values(), &p1.values());
        let m = aggregate_mean(&[p1.clone(), p0.clone()]).unwrap();
        assert_eq!(m.values()[(0, 1)], 0.5);
        assert_eq!(m.run_count(), 2);

        let c = certainty(&[p1.clone(), p0.clone()], 0.5).unwrap();
        assert_eq!(c.values()[(0, 1)], 0.5);
        assert_eq!(c.values()[(1, 0)], 1.0);
        assert_eq!(c.values()[(0, 0)], 1.0);
        let c2 = certainty(&[p1.clone(), p0], 2.0).unwrap();
        assert!(c2.values()[(0, 1)] > c.values()[(0, 1)]);
        let same = certainty(&[p1.clone(), p1.clone(), p1], 0.1).unwrap();
        assert!(same.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn mismatched_names() {
        let a = assemble_prior(&[], &names(&["a", "b"])).unwrap();
        let b = assemble_prior(&[], &names(&["a", "c"])).unwrap();
        assert!(matches!(
            aggregate_mean(&[a.clone(), b.clone()]),
            Err(Error::NameMismatch)
        ));
        assert!(matches!(
            certainty(&[a.clone(), b], 1.0),
            Err(Error::NameMismatch)
        ));
        assert!(aggregate_mean(&[]).is_err());
        assert!(certainty(&[a], 0.0).is_err());
    }

    #[test]
    fn random_prior_counts() {
        let n5 = names(&["a", "b", "c", "d", "e"]);
        assert_eq!(random_prior(5, 0, &n5, 1).unwrap().edge_count(), 0);
        let full = random_prior(5, 20, &n5, 1).unwrap();
        assert_eq!(full.edge_count(), 20);
        assert!(matches!(
            random_prior(5, 21, &n5, 1),
            Err(Error::EdgeCountOutOfRange { count: 21, max: 20 })
        ));
        let n12: Vec<String> = (0..12).map(|i| format!("v{i}")).collect();
        let arctic = random_prior(12, 43, &n12, 7).unwrap();
        assert_eq!(arctic.edge_count(), 43);
        assert_eq!(arctic, random_prior(12, 43, &n12, 7).unwrap());
    }

    #[test]
    fn json_shapes() {
        let n = names(&["a", "b"]);
        let p = assemble_prior(&[PairVerdict::new("a", "b", Answer::C).unwrap()], &n).unwrap();
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            r#"{"names":["a","b"],"adj":[[0,1],[1,0]]}"#
        );
        let m = aggregate_mean(&[p.clone(), assemble_prior(&[], &n).unwrap()]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"names":["a","b"],"adj":[[0.0,0.5],[0.5,0.0]],"run_count":2}"#
        );
        assert_eq!(serde_json::from_str::<MeanPrior>(&s).unwrap(), m);
        assert!(serde_json::from_str::<MeanPrior>(
            r#"{"names":["a","b"],"adj":[[0.0,1.5],[0.5,0.0]],"run_count":2}"#
        )
        .is_err());
    }
}
