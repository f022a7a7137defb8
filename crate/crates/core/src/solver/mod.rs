//! Augmented-Lagrangian structure learning with optional prior guidance.

mod config;
mod objective;

use log::debug;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use config::{Activation, SolverConfig, PRESETS};
pub use objective::{
    fitting_loss, init_from_prior, objective_gradient, sim_loss, total_objective, PriorTarget,
};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, WeightMatrix};
use crate::scalar::Scalar;
use crate::synthetic::Dataset;
use objective::{Evaluation, Objective};

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;
const MAX_STEP: f64 = 1e6;
/// `rho` grows whenever `h` did not drop below this fraction of its
/// previous value.
const PROGRESS_FACTOR: f64 = 0.25;

/// One outer iteration. `objective` excludes the penalty terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub objective: f64,
    pub h: f64,
    pub rho: f64,
    pub alpha: f64,
    pub inner_iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState<T: Scalar> {
    pub w: WeightMatrix<T>,
    pub rho: f64,
    pub alpha: f64,
    pub outer_iteration: usize,
    pub history: Vec<HistoryEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutput<T: Scalar> {
    /// Final weights before thresholding.
    pub w: WeightMatrix<T>,
    pub state: SolverState<T>,
    /// `h(w) <= h_tolerance` at exit. When false the weights are still the
    /// last iterate and usable.
    pub converged: bool,
    pub h_final: f64,
}

/// Serialized form of a solve for audit and regression files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SolveRecord<T: Scalar> {
    pub names: Vec<String>,
    pub w: Vec<Vec<T>>,
    pub h_final: f64,
    pub converged: bool,
    pub history: Vec<HistoryEntry>,
    pub config: SolverConfig,
}

impl<T: Scalar> SolveOutput<T> {
    pub fn record(&self, names: &[String], cfg: &SolverConfig) -> SolveRecord<T> {
        SolveRecord {
            names: names.to_vec(),
            w: self.w.to_rows(),
            h_final: self.h_final,
            converged: self.converged,
            history: self.state.history.clone(),
            config: cfg.clone(),
        }
    }

    pub fn threshold(&self, tau: f64, names: &[String]) -> Result<DirectedGraph> {
        self.w.threshold(T::lit(tau), names)
    }
}

/// Result of one inner minimization.
#[derive(Clone, Debug)]
pub struct InnerOutcome<T: Scalar> {
    pub w: WeightMatrix<T>,
    /// Augmented objective at the start and after every accepted step.
    pub trace: Vec<T>,
    pub h: T,
    pub score: T,
}

impl<T: Scalar> InnerOutcome<T> {
    pub fn iterations(&self) -> usize {
        self.trace.len() - 1
    }
}

fn dot<T: Scalar>(a: &Array2<T>, b: &Array2<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// `w - eta * p`, with any entry that would change sign set to zero.
fn projected_step<T: Scalar>(
    w: &WeightMatrix<T>,
    p: &Array2<T>,
    eta: T,
) -> Result<WeightMatrix<T>> {
    let mut next = w.as_array().clone();
    next.zip_mut_with(p, |x, &pij| {
        let moved = *x - eta * pij;
        let orthant = if *x != T::zero() { *x } else { -pij };
        *x = if moved * orthant > T::zero() {
            moved
        } else {
            T::zero()
        };
    });
    WeightMatrix::new(next)
}

/// Descent with Armijo backtracking on
/// `score(W) + (rho/2) h(W)^2 + alpha h(W)`.
///
/// The direction is the minimum-norm subgradient and steps never carry an
/// entry across zero, so entries the `l1` and prior terms pin at zero stay
/// there instead of chattering. Each iteration tries a Barzilai-Borwein
/// length and halves it until sufficient decrease holds; the trace never
/// increases.
fn minimize_with<T: Scalar>(
    obj: &Objective<'_, T>,
    cfg: &SolverConfig,
    w0: WeightMatrix<T>,
    rho: T,
    alpha: T,
) -> Result<InnerOutcome<T>> {
    let c = T::lit(ARMIJO_C);
    let min_step = T::lit(MIN_STEP);
    let max_step = T::lit(MAX_STEP);
    let tol = T::lit(cfg.inner_tolerance);

    let mut w = w0;
    let mut cur: Evaluation<T> = obj.evaluate(&w, rho, alpha)?;
    let mut dir = obj.descent_direction(&w, &cur);
    let mut trace = vec![cur.augmented];
    let mut eta = T::one();
    let mut prev: Option<(WeightMatrix<T>, Array2<T>)> = None;

    for _ in 0..cfg.max_inner_iterations {
        if dir.iter().all(|&v| v == T::zero()) {
            break;
        }
        if let Some((pw, pd)) = &prev {
            let s = w.as_array() - pw.as_array();
            let y = &dir - pd;
            let sy = dot(&s, &y);
            eta = if sy > T::zero() {
                dot(&s, &s) / sy
            } else {
                eta + eta
            };
        }
        eta = eta.min(max_step);

        let mut accepted = None;
        while eta >= min_step {
            let trial = projected_step(&w, &dir, eta)?;
            let delta = trial.as_array() - w.as_array();
            let predicted = dot(&dir, &delta);
            // an overflowing trial is just a step that was too long
            if let Ok(e) = obj.evaluate(&trial, rho, alpha) {
                if predicted < T::zero() && e.augmented <= cur.augmented + c * predicted {
                    accepted = Some((trial, e));
                    break;
                }
            }
            eta *= T::lit(0.5);
        }
        let Some((next_w, next)) = accepted else {
            break;
        };
        let decrease = cur.augmented - next.augmented;
        let scale = cur.augmented.abs().max(T::one());
        let next_dir = obj.descent_direction(&next_w, &next);
        prev = Some((
            std::mem::replace(&mut w, next_w),
            std::mem::replace(&mut dir, next_dir),
        ));
        cur = next;
        trace.push(cur.augmented);
        if decrease <= tol * scale {
            break;
        }
    }
    Ok(InnerOutcome {
        w,
        trace,
        h: cur.h,
        score: cur.score,
    })
}

/// One inner minimization at fixed `(rho, alpha)` from `w0`.
pub fn minimize_inner<T: Scalar>(
    data: &Dataset<T>,
    prior: Option<&PriorTarget<T>>,
    cfg: &SolverConfig,
    w0: WeightMatrix<T>,
    rho: f64,
    alpha: f64,
) -> Result<InnerOutcome<T>> {
    cfg.validate()?;
    let obj = Objective::new(data, prior, cfg)?;
    minimize_with(&obj, cfg, w0, T::lit(rho), T::lit(alpha))
}

/// Learns a weighted adjacency matrix under the acyclicity constraint.
///
/// Starts from `lambda_init * K` when a prior is given (zero otherwise),
/// then alternates inner minimization with multiplier updates until
/// `h <= h_tolerance` or the outer budget runs out. Running out of budget is
/// reported through `converged`, not as an error.
pub fn solve<T: Scalar>(
    data: &Dataset<T>,
    prior: Option<&PriorTarget<T>>,
    cfg: &SolverConfig,
) -> Result<SolveOutput<T>> {
    cfg.validate()?;
    if data.n_samples() == 0 {
        return Err(Error::InvalidArgument("dataset has no rows".into()));
    }
    if let Some(p) = prior {
        if p.names() != data.names() {
            return Err(Error::NameMismatch);
        }
    }
    let obj = Objective::new(data, prior, cfg)?;
    let mut w = match prior {
        Some(p) if cfg.lambda_init > 0.0 => init_from_prior(p, cfg.lambda_init)?,
        _ => WeightMatrix::zeros(data.dim()),
    };

    let mut rho = cfg.rho_initial;
    let mut alpha = 0.0;
    let mut h_prev = f64::INFINITY;
    let mut history = Vec::new();
    let mut h_final = crate::graph::acyclicity_value(&w)?.as_f64();
    let mut converged = false;

    for iteration in 0..cfg.max_outer_iterations {
        let inner = minimize_with(&obj, cfg, w, T::lit(rho), T::lit(alpha))?;
        w = inner.w;
        let h = inner.h.as_f64();
        alpha += rho * h;
        history.push(HistoryEntry {
            iteration,
            objective: inner.score.as_f64(),
            h,
            rho,
            alpha,
            inner_iterations: inner.trace.len() - 1,
        });
        debug!(
            "outer {iteration}: objective {:.6e} h {h:.3e} rho {rho:.1e} alpha {alpha:.3e} inner {}",
            inner.score.as_f64(),
            inner.trace.len() - 1
        );
        h_final = h;
        if h <= cfg.h_tolerance {
            converged = true;
            break;
        }
        if h > PROGRESS_FACTOR * h_prev {
            rho = (rho * cfg.rho_multiplier).min(cfg.rho_max);
        }
        h_prev = h;
    }

    let state = SolverState {
        w: w.clone(),
        rho,
        alpha,
        outer_iteration: history.len(),
        history,
    };
    Ok(SolveOutput {
        w,
        state,
        converged,
        h_final,
    })
}
