use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maps `|w|` into `[0, 1]` before comparing with the prior.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// `sigmoid(t * |w|)`
    #[default]
    Sigmoid,
    /// `clamp(t * |w|, 0, 1)`
    Clamp01,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Weight of the `||W||_1` term.
    pub lambda_sparsity: f64,
    /// Weight of the prior-similarity term.
    pub lambda_sim: f64,
    /// Initial `W = lambda_init * K`; zero means the usual zero start.
    pub lambda_init: f64,
    /// Steepness `t` of the activation.
    pub sigmoid_steepness: f64,
    pub activation: Activation,
    pub threshold_tau: f64,
    pub max_outer_iterations: usize,
    pub max_inner_iterations: usize,
    /// Inner loop stops once an accepted step improves the augmented
    /// objective by less than this fraction of `max(|F|, 1)`.
    pub inner_tolerance: f64,
    pub h_tolerance: f64,
    pub rho_initial: f64,
    pub rho_multiplier: f64,
    pub rho_max: f64,
    /// Multiply each similarity term by the prior's certainty when one is
    /// supplied.
    pub certainty_weighting: bool,
    /// Recorded for provenance. The optimizer itself draws no random numbers.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda_sparsity: 0.1,
            lambda_sim: 0.0,
            lambda_init: 0.0,
            sigmoid_steepness: 10.0,
            activation: Activation::Sigmoid,
            threshold_tau: 0.3,
            max_outer_iterations: 100,
            max_inner_iterations: 5000,
            inner_tolerance: 1e-10,
            h_tolerance: 1e-8,
            rho_initial: 1.0,
            rho_multiplier: 10.0,
            rho_max: 1e16,
            certainty_weighting: false,
            seed: 0,
        }
    }
}

/// Named hyperparameter sets.
pub const PRESETS: [&str; 5] = [
    "default",
    "arctic-notears",
    "arctic-notears-vanilla",
    "sachs-notears",
    "sachs-notears-vanilla",
];

impl SolverConfig {
    /// Prior-integrated runs on synthetic data: similarity weight 0.7 and a
    /// unit-scale start from the prior.
    pub fn with_prior_defaults() -> Self {
        Self {
            lambda_sim: 0.7,
            lambda_init: 1.0,
            ..Self::default()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        let heavy_sparsity = Self {
            lambda_sparsity: 1.0,
            ..Self::default()
        };
        match name {
            "default" => Ok(Self::default()),
            "arctic-notears" => Ok(Self {
                lambda_sim: 0.7,
                lambda_init: 1.0,
                threshold_tau: 0.1,
                ..heavy_sparsity
            }),
            "arctic-notears-vanilla" => Ok(Self {
                threshold_tau: 0.13,
                ..heavy_sparsity
            }),
            "sachs-notears" => Ok(Self {
                lambda_sim: 0.05,
                lambda_init: 1.0,
                threshold_tau: 0.57,
                ..heavy_sparsity
            }),
            "sachs-notears-vanilla" => Ok(Self {
                threshold_tau: 0.16,
                ..heavy_sparsity
            }),
            other => Err(Error::InvalidArgument(format!(
                "unknown preset `{other}`; known presets: {}",
                PRESETS.join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("lambda_sparsity", self.lambda_sparsity),
            ("lambda_sim", self.lambda_sim),
            ("lambda_init", self.lambda_init),
            ("threshold_tau", self.threshold_tau),
            ("inner_tolerance", self.inner_tolerance),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        let positive = [
            ("sigmoid_steepness", self.sigmoid_steepness),
            ("h_tolerance", self.h_tolerance),
            ("rho_initial", self.rho_initial),
            ("rho_max", self.rho_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be > 0, got {v}"
                )));
            }
        }
        if !(self.rho_multiplier > 1.0 && self.rho_multiplier.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rho_multiplier must be > 1, got {}",
                self.rho_multiplier
            )));
        }
        if self.max_outer_iterations == 0 || self.max_inner_iterations == 0 {
            return Err(Error::InvalidArgument(
                "iteration budgets must be positive".into(),
            ));
        }
        Ok(())
    }
}
