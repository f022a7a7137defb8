//! Synthetic benchmarks: the physics graphs, subgraph reduction, linear-SEM
//! sampling with Gaussian noise and the three-variable motivating scenario.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`) seeded through
//! `SeedableRng::seed_from_u64`, so a seed reproduces the same bits on every
//! platform. Edge coefficients and noise draws use separate ChaCha streams.

mod dataset;
mod physics;

pub use dataset::Dataset;
pub use physics::{build_physics_graph, PHYSICS_EDGES, PHYSICS_LONG_NAMES, PHYSICS_NODES};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, WeightMatrix};
use crate::scalar::Scalar;

const NOISE_STREAM: u64 = 0;
const WEIGHT_STREAM: u64 = 1;

/// Default per-variable noise variance of the physics benchmark.
pub const PHYSICS_NOISE_VARIANCE: f64 = 0.5;
/// Default number of samples of the physics benchmark.
pub const PHYSICS_SAMPLE_COUNT: usize = 5000;

/// Parameters of a linear SEM `X_j = sum_i w[i][j] X_i + eps_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SemSpecRepr<T>", into = "SemSpecRepr<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SemSpec<T: Scalar> {
    graph: DirectedGraph,
    weights: WeightMatrix<T>,
    noise_variance: Vec<T>,
    sample_count: usize,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
struct SemSpecRepr<T: Scalar> {
    graph: DirectedGraph,
    weights: WeightMatrix<T>,
    noise_variance: Vec<T>,
    sample_count: usize,
    seed: u64,
}

impl<T: Scalar> TryFrom<SemSpecRepr<T>> for SemSpec<T> {
    type Error = Error;

    fn try_from(r: SemSpecRepr<T>) -> Result<Self> {
        SemSpec::new(r.graph, r.weights, r.noise_variance, r.sample_count, r.seed)
    }
}

impl<T: Scalar> From<SemSpec<T>> for SemSpecRepr<T> {
    fn from(s: SemSpec<T>) -> Self {
        SemSpecRepr {
            graph: s.graph,
            weights: s.weights,
            noise_variance: s.noise_variance,
            sample_count: s.sample_count,
            seed: s.seed,
        }
    }
}

impl<T: Scalar> SemSpec<T> {
    /// Validates the SEM. A zero noise variance is accepted and yields a
    /// deterministic column.
    pub fn new(
        graph: DirectedGraph,
        weights: WeightMatrix<T>,
        noise_variance: Vec<T>,
        sample_count: usize,
        seed: u64,
    ) -> Result<Self> {
        let d = graph.dim();
        if weights.dim() != d || noise_variance.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "graph has {d} nodes, weights {0}x{0}, {1} noise variances",
                weights.dim(),
                noise_variance.len()
            )));
        }
        for i in 0..d {
            for j in 0..d {
                if (weights.get(i, j) != T::zero()) != graph.has_edge(i, j) {
                    return Err(Error::InvalidArgument(format!(
                        "weight ({i}, {j}) does not match the graph's support"
                    )));
                }
            }
        }
        if !graph.is_acyclic() {
            return Err(Error::Cyclic);
        }
        if let Some(v) = noise_variance
            .iter()
            .find(|v| !(**v >= T::zero() && v.is_finite()))
        {
            return Err(Error::InvalidArgument(format!(
                "noise variance {v} must be >= 0"
            )));
        }
        if sample_count == 0 {
            return Err(Error::InvalidArgument(
                "sample_count must be positive".into(),
            ));
        }
        Ok(Self {
            graph,
            weights,
            noise_variance,
            sample_count,
            seed,
        })
    }

    /// Physics-style SEM: coefficients from [`default_weights`] and the same
    /// noise variance on every variable.
    pub fn with_default_weights(
        graph: DirectedGraph,
        noise_variance: T,
        sample_count: usize,
        seed: u64,
    ) -> Result<Self> {
        let weights = default_weights(&graph, seed)?;
        let d = graph.dim();
        Self::new(graph, weights, vec![noise_variance; d], sample_count, seed)
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn weights(&self) -> &WeightMatrix<T> {
        &self.weights
    }

    pub fn noise_variance(&self) -> &[T] {
        &self.noise_variance
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Removes `node`, connecting each of its parents to each of its children
/// so that ancestor/descendant relations among the remaining nodes survive.
pub fn subgraph_reduce(g: &DirectedGraph, node: &str) -> Result<DirectedGraph> {
    let idx = g.index_of(node)?;
    if !g.is_acyclic() {
        return Err(Error::Cyclic);
    }
    let mut bridged = g.clone();
    for p in g.parents(idx) {
        for c in g.children(idx) {
            bridged.add_edge(p, c)?;
        }
    }
    Ok(bridged.without_node(idx))
}

/// Edge coefficients drawn uniformly from `[-2, -0.5] ∪ [0.5, 2]`, visited
/// in row-major edge order. Non-edges are zero.
pub fn default_weights<T: Scalar>(g: &DirectedGraph, seed: u64) -> Result<WeightMatrix<T>> {
    if !g.is_acyclic() {
        return Err(Error::Cyclic);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(WEIGHT_STREAM);
    let mut w = WeightMatrix::zeros(g.dim());
    for (i, j) in g.edges() {
        let magnitude: f64 = rng.random_range(0.5..=2.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        w.set(i, j, T::lit(sign * magnitude));
    }
    Ok(w)
}

/// Samples `spec.sample_count` rows in topological order. Deterministic in
/// the seed; identical specs give bitwise-identical data.
pub fn sample_linear_sem<T: Scalar>(spec: &SemSpec<T>) -> Result<Dataset<T>> {
    let order = spec.graph.topological_order().ok_or(Error::Cyclic)?;
    let d = spec.graph.dim();
    let parents: Vec<Vec<usize>> = (0..d).map(|j| spec.graph.parents(j)).collect();
    let scale: Vec<T> = spec.noise_variance.iter().map(|v| v.sqrt()).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    rng.set_stream(NOISE_STREAM);
    let mut x = Array2::<T>::zeros((spec.sample_count, d));
    for mut row in x.outer_iter_mut() {
        for &j in &order {
            let z: f64 = rng.sample(StandardNormal);
            let mut v = scale[j] * T::lit(z);
            for &p in &parents[j] {
                v += spec.weights.get(p, j) * row[p];
            }
            row[j] = v;
        }
    }
    Dataset::new(spec.graph.names().to_vec(), x)
}

/// Noise variances of the motivating AP -> TSI -> ER chain: the TSI -> ER
/// link is ten times noisier than AP -> TSI.
pub const MOTIVATING_NOISE: [f64; 3] = [1.0, 0.1, 1.0];

/// The chain AP -> TSI -> ER.
pub fn motivating_graph() -> Result<DirectedGraph> {
    DirectedGraph::from_edges(["AP", "TSI", "ER"], &[("AP", "TSI"), ("TSI", "ER")])
}

/// Ground truth AP -> TSI -> ER with unit coefficients and
/// [`MOTIVATING_NOISE`], sampled with 5000 rows.
pub fn build_motivating_scenario(seed: u64) -> Result<(DirectedGraph, Dataset<f64>)> {
    let g = motivating_graph()?;
    let mut w = WeightMatrix::zeros(3);
    w.set(0, 1, 1.0);
    w.set(1, 2, 1.0);
    let spec = SemSpec::new(
        g.clone(),
        w,
        MOTIVATING_NOISE.to_vec(),
        PHYSICS_SAMPLE_COUNT,
        seed,
    )?;
    Ok((g, sample_linear_sem(&spec)?))
}
