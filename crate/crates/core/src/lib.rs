//! Causal structure learning that folds language-model prior knowledge into
//! continuous DAG optimization.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64`/`*F32` aliases below name the concrete instantiations.

pub mod error;
pub mod graph;
pub mod harness;
pub mod matrix;
pub mod metrics;
pub mod prior;
pub mod scalar;
pub mod solver;
pub mod synthetic;

pub use error::{Error, Result};
pub use graph::{
    acyclicity_gradient, acyclicity_value, matrix_exponential, threshold, DirectedGraph,
    WeightMatrix,
};
pub use metrics::{evaluate, ConfusionCounts, MetricsReport};
pub use prior::{CertaintyMatrix, MeanPrior, PairVerdict, PriorMatrix};
pub use scalar::Scalar;
pub use solver::{solve, SolveOutput, SolverConfig, SolverState};
pub use synthetic::{Dataset, SemSpec};

pub type WeightMatrixF64 = WeightMatrix<f64>;
pub type WeightMatrixF32 = WeightMatrix<f32>;
pub type DatasetF64 = Dataset<f64>;
pub type DatasetF32 = Dataset<f32>;
pub type SemSpecF64 = SemSpec<f64>;
pub type SemSpecF32 = SemSpec<f32>;
pub type SolveOutputF64 = SolveOutput<f64>;
pub type SolveOutputF32 = SolveOutput<f32>;
