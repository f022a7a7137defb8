//! Score terms: least-squares fit, `l1` sparsity, prior similarity, and the
//! gradient of the augmented Lagrangian.

use ndarray::Array2;

use super::config::{Activation, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::{acyclicity_value_and_gradient, WeightMatrix};
use crate::prior::{CertaintyMatrix, MeanPrior, PriorMatrix};
use crate::scalar::{sign0, Scalar};
use crate::synthetic::Dataset;

/// Prior in the form the optimizer consumes: targets in `[0, 1]` and an
/// optional per-entry certainty.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorTarget<T: Scalar> {
    names: Vec<String>,
    k: Array2<T>,
    certainty: Option<Array2<T>>,
}

impl<T: Scalar> PriorTarget<T> {
    pub fn new(names: Vec<String>, k: Array2<T>) -> Result<Self> {
        let d = names.len();
        if k.dim() != (d, d) {
            return Err(Error::DimensionMismatch(format!("prior is not {d}x{d}")));
        }
        if k.iter().any(|v| !(*v >= T::zero() && *v <= T::one())) {
            return Err(Error::InvalidArgument(
                "prior entries must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            names,
            k,
            certainty: None,
        })
    }

    pub fn with_certainty(mut self, c: &CertaintyMatrix) -> Result<Self> {
        if c.names() != self.names.as_slice() {
            return Err(Error::NameMismatch);
        }
        self.certainty = Some(c.values().mapv(T::lit));
        Ok(self)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &Array2<T> {
        &self.k
    }

    pub fn certainty(&self) -> Option<&Array2<T>> {
        self.certainty.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }
}

impl<T: Scalar> From<&PriorMatrix> for PriorTarget<T> {
    fn from(p: &PriorMatrix) -> Self {
        Self {
            names: p.names().to_vec(),
            k: p.values().mapv(T::lit),
            certainty: None,
        }
    }
}

impl<T: Scalar> From<&MeanPrior> for PriorTarget<T> {
    fn from(p: &MeanPrior) -> Self {
        Self {
            names: p.names().to_vec(),
            k: p.values().mapv(T::lit),
            certainty: None,
        }
    }
}

/// `W = lambda_init * K` with a zero diagonal.
pub fn init_from_prior<T: Scalar>(
    prior: &PriorTarget<T>,
    lambda_init: f64,
) -> Result<WeightMatrix<T>> {
    if !(lambda_init >= 0.0 && lambda_init.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda_init must be >= 0, got {lambda_init}"
        )));
    }
    WeightMatrix::new(prior.k.mapv(|k| k * T::lit(lambda_init)))
}

fn check_dims<T: Scalar>(w: &WeightMatrix<T>, d: usize, what: &str) -> Result<()> {
    if w.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "weights are {0}x{0} but {what} has dimension {d}",
            w.dim()
        )));
    }
    Ok(())
}

/// `(1 / 2n) ||X - XW||_F^2`, computed directly from the data.
pub fn fitting_loss<T: Scalar>(w: &WeightMatrix<T>, data: &Dataset<T>) -> Result<T> {
    check_dims(w, data.dim(), "the dataset")?;
    let x = data.data();
    let r = x - &x.dot(w.as_array());
    let ss = r.iter().fold(T::zero(), |a, &v| a + v * v);
    Ok(ss / (T::lit(2.0) * T::from_usize_lossy(data.n_samples().max(1))))
}

#[inline]
fn activation<T: Scalar>(kind: Activation, t: T, magnitude: T) -> (T, T) {
    let z = t * magnitude;
    match kind {
        Activation::Sigmoid => {
            let s = T::one() / (T::one() + (-z).exp());
            (s, t * s * (T::one() - s))
        }
        Activation::Clamp01 => {
            if z <= T::zero() {
                (T::zero(), T::zero())
            } else if z >= T::one() {
                (T::one(), T::zero())
            } else {
                (z, t)
            }
        }
    }
}

fn sim_weight<'a, T: Scalar>(
    prior: &'a PriorTarget<T>,
    cfg: &SolverConfig,
) -> Option<&'a Array2<T>> {
    if cfg.certainty_weighting {
        prior.certainty.as_ref()
    } else {
        None
    }
}

/// `sum_ij c_ij |a(t |w_ij|) - k_ij|` with `c = 1` unless certainty weighting
/// is enabled and the prior carries certainties.
pub fn sim_loss<T: Scalar>(
    w: &WeightMatrix<T>,
    prior: &PriorTarget<T>,
    cfg: &SolverConfig,
) -> Result<T> {
    check_dims(w, prior.dim(), "the prior")?;
    let t = T::lit(cfg.sigmoid_steepness);
    let weight = sim_weight(prior, cfg);
    let mut acc = T::zero();
    for ((ij, &wij), &kij) in w.as_array().indexed_iter().zip(prior.k.iter()) {
        let (a, _) = activation(cfg.activation, t, wij.abs());
        let term = (a - kij).abs();
        acc += weight.map_or(term, |c| c[ij] * term);
    }
    Ok(acc)
}

fn sim_gradient<T: Scalar>(
    w: &WeightMatrix<T>,
    prior: &PriorTarget<T>,
    cfg: &SolverConfig,
) -> Array2<T> {
    let t = T::lit(cfg.sigmoid_steepness);
    let weight = sim_weight(prior, cfg);
    let mut g = Array2::zeros(w.as_array().dim());
    for ((ij, &wij), &kij) in w.as_array().indexed_iter().zip(prior.k.iter()) {
        let (a, da) = activation(cfg.activation, t, wij.abs());
        let v = sign0(a - kij) * da * sign0(wij);
        g[ij] = weight.map_or(v, |c| c[ij] * v);
    }
    g
}

/// Fit + `lambda_sparsity * ||W||_1` + `lambda_sim * sim_loss`. The
/// acyclicity penalty is not included.
pub fn total_objective<T: Scalar>(
    w: &WeightMatrix<T>,
    data: &Dataset<T>,
    prior: Option<&PriorTarget<T>>,
    cfg: &SolverConfig,
) -> Result<T> {
    let mut total = fitting_loss(w, data)? + T::lit(cfg.lambda_sparsity) * w.l1_norm();
    if let Some(p) = prior {
        if cfg.lambda_sim != 0.0 {
            total += T::lit(cfg.lambda_sim) * sim_loss(w, p, cfg)?;
        }
    }
    Ok(total)
}

/// Gradient of the augmented Lagrangian
/// `fit + l1 + sim + (rho/2) h^2 + alpha h`, using the subgradient
/// `sign(w)` (with `sign(0) = 0`) for the `l1` term. Diagonal is zero.
pub fn objective_gradient<T: Scalar>(
    w: &WeightMatrix<T>,
    data: &Dataset<T>,
    prior: Option<&PriorTarget<T>>,
    cfg: &SolverConfig,
    rho: f64,
    alpha: f64,
) -> Result<WeightMatrix<T>> {
    let obj = Objective::new(data, prior, cfg)?;
    Ok(obj.evaluate(w, T::lit(rho), T::lit(alpha))?.gradient)
}

pub(crate) struct Evaluation<T: Scalar> {
    /// Fit + l1 + sim.
    pub score: T,
    pub h: T,
    /// Score plus the acyclicity penalty terms.
    pub augmented: T,
    pub gradient: WeightMatrix<T>,
}

/// Objective with the data reduced to its `d x d` second-moment matrix
/// `S = XᵀX / n`, so that the fit is `0.5 tr((I - W)ᵀ S (I - W))`.
pub(crate) struct Objective<'a, T: Scalar> {
    gram: Array2<T>,
    /// Right derivative at `|w| = 0` of the terms that depend on `|w|`.
    kink: Array2<T>,
    prior: Option<&'a PriorTarget<T>>,
    cfg: &'a SolverConfig,
    lambda_sparsity: T,
    lambda_sim: T,
}

impl<'a, T: Scalar> Objective<'a, T> {
    pub fn new(
        data: &Dataset<T>,
        prior: Option<&'a PriorTarget<T>>,
        cfg: &'a SolverConfig,
    ) -> Result<Self> {
        if let Some(p) = prior {
            if p.dim() != data.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "prior is {0}x{0} but the dataset has {1} variables",
                    p.dim(),
                    data.dim()
                )));
            }
        }
        let x = data.data();
        let n = T::from_usize_lossy(data.n_samples().max(1));
        let gram = x.t().dot(x).mapv(|v| v / n);
        // a zero weight switches the prior machinery off entirely
        let prior = prior.filter(|_| cfg.lambda_sim != 0.0);
        let d = data.dim();
        let lambda_sparsity = T::lit(cfg.lambda_sparsity);
        let mut kink = Array2::from_elem((d, d), lambda_sparsity);
        if let Some(p) = prior {
            let t = T::lit(cfg.sigmoid_steepness);
            let (a0, _) = activation(cfg.activation, t, T::zero());
            let slope0 = match cfg.activation {
                Activation::Sigmoid => t * T::lit(0.25),
                Activation::Clamp01 => t,
            };
            let weight = sim_weight(p, cfg);
            for ((ij, v), &kij) in kink.indexed_iter_mut().zip(p.k.iter()) {
                // |a - k| grows with |w| unless a(0) is still below k
                let s = if a0 < kij { -T::one() } else { T::one() };
                let c = weight.map_or(T::one(), |c| c[ij]);
                *v += T::lit(cfg.lambda_sim) * c * s * slope0;
            }
        }
        Ok(Self {
            gram,
            kink,
            prior,
            cfg,
            lambda_sparsity,
            lambda_sim: T::lit(cfg.lambda_sim),
        })
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn evaluate(&self, w: &WeightMatrix<T>, rho: T, alpha: T) -> Result<Evaluation<T>> {
        check_dims(w, self.dim(), "the dataset")?;
        let d = self.dim();
        let mut resid = Array2::<T>::eye(d);
        resid -= w.as_array();
        let s_resid = self.gram.dot(&resid);
        let half = T::lit(0.5);
        let fit = half
            * resid
                .iter()
                .zip(s_resid.iter())
                .fold(T::zero(), |a, (&m, &sm)| a + m * sm);
        let mut score = fit + self.lambda_sparsity * w.l1_norm();

        let mut grad = -s_resid;
        grad.zip_mut_with(w.as_array(), |g, &wij| {
            *g += self.lambda_sparsity * sign0(wij)
        });
        if let Some(p) = self.prior {
            score += self.lambda_sim * sim_loss(w, p, self.cfg)?;
            grad.scaled_add(self.lambda_sim, &sim_gradient(w, p, self.cfg));
        }

        let (h, hgrad) = acyclicity_value_and_gradient(w)?;
        let augmented = score + half * rho * h * h + alpha * h;
        grad.scaled_add(rho * h + alpha, hgrad.as_array());
        grad.diag_mut().fill(T::zero());
        if !augmented.is_finite() || grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("objective or gradient".into()));
        }
        Ok(Evaluation {
            score,
            h,
            augmented,
            gradient: WeightMatrix::new(grad)?,
        })
    }

    /// Steepest-descent direction (negated) of the nonsmooth objective.
    ///
    /// Away from zero this is the ordinary gradient. At `w_ij = 0` the
    /// one-sided derivatives `g ± kink` decide whether moving either way
    /// decreases the objective; if neither does the component is zero.
    pub fn descent_direction(&self, w: &WeightMatrix<T>, eval: &Evaluation<T>) -> Array2<T> {
        let mut p = eval.gradient.as_array().clone();
        for ((ij, v), &wij) in p.indexed_iter_mut().zip(w.as_array().iter()) {
            if wij != T::zero() || ij.0 == ij.1 {
                continue;
            }
            let g = *v;
            let kink = self.kink[ij];
            let up = g + kink;
            let down = kink - g;
            *v = if up < T::zero() && up <= down {
                up
            } else if down < T::zero() {
                -down
            } else {
                T::zero()
            };
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::acyclicity_gradient;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("x{i}")).collect()
    }

    fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Dataset<f64> {
        Dataset::new(
            names(d),
            Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0..2.0)),
        )
        .unwrap()
    }

    #[test]
    fn fit_at_zero_is_half_mean_square() {
        let ds = Dataset::new(names(2), array![[1.0, 2.0], [3.0, -1.0]]).unwrap();
        let v = fitting_loss(&WeightMatrix::zeros(2), &ds).unwrap();
        assert_eq!(v, (1.0 + 4.0 + 9.0 + 1.0) / 4.0);
    }

    #[test]
    fn fit_matches_naive_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ds = random_dataset(&mut rng, 40, 4);
        let w = WeightMatrix::new(Array2::from_shape_fn((4, 4), |_| {
            rng.random_range(-1.0..1.0)
        }))
        .unwrap();
        let x = ds.data();
        let mut naive = 0.0;
        for r in 0..40 {
            for j in 0..4 {
                let mut pred = 0.0;
                for i in 0..4 {
                    pred += x[(r, i)] * w.get(i, j);
                }
                naive += (x[(r, j)] - pred).powi(2);
            }
        }
        naive /= 80.0;
        assert!((fitting_loss(&w, &ds).unwrap() - naive).abs() < 1e-10);
        // Gram form agrees
        let cfg = SolverConfig {
            lambda_sparsity: 0.0,
            ..Default::default()
        };
        let obj = Objective::new(&ds, None, &cfg).unwrap();
        assert!((obj.evaluate(&w, 0.0, 0.0).unwrap().score - naive).abs() < 1e-10);
    }

    #[test]
    fn noise_free_child_column_fits_exactly() {
        let ds = Dataset::new(names(2), array![[1.0, 2.0], [-0.5, -1.0], [3.0, 6.0]]).unwrap();
        let mut w = WeightMatrix::zeros(2);
        w.set(0, 1, 2.0);
        let r = ds.data() - &ds.data().dot(w.as_array());
        let child: f64 = r.column(1).iter().map(|v| v * v).sum();
        assert!(child < 1e-12);
        // only the root column remains: (1 + 0.25 + 9) / 6
        assert!((fitting_loss(&w, &ds).unwrap() - 10.25 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn sim_loss_examples() {
        let d = 3;
        let zero = PriorTarget::<f64>::new(names(d), Array2::zeros((d, d))).unwrap();
        let w0 = WeightMatrix::zeros(d);
        let sig = SolverConfig::default();
        assert_eq!(sim_loss(&w0, &zero, &sig).unwrap(), 0.5 * 9.0);
        let clamp = SolverConfig {
            activation: Activation::Clamp01,
            ..Default::default()
        };
        assert_eq!(sim_loss(&w0, &zero, &clamp).unwrap(), 0.0);

        let k = PriorTarget::<f64>::new(names(1 + 1), array![[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let mut w = WeightMatrix::zeros(2);
        w.set(0, 1, 0.5);
        let total = sim_loss(&w, &k, &sig).unwrap();
        let term = total - 3.0 * 0.5; // the three untouched zero entries
        let sigma5 = 1.0 / (1.0 + (-5.0f64).exp());
        assert!((term - (1.0 - sigma5)).abs() < 1e-15);
        assert!((term - 0.0067).abs() < 1e-4);
    }

    #[test]
    fn certainty_weighting_scales_terms() {
        use crate::prior::{assemble_prior, certainty, Answer, PairVerdict};
        let n = names(2);
        let p1 = assemble_prior(&[PairVerdict::new("x0", "x1", Answer::A).unwrap()], &n).unwrap();
        let p0 = assemble_prior(&[], &n).unwrap();
        let c = certainty(&[p1.clone(), p0], 0.5).unwrap();
        let target = PriorTarget::<f64>::from(&p1).with_certainty(&c).unwrap();
        let w = WeightMatrix::zeros(2);
        let off = SolverConfig::default();
        let on = SolverConfig {
            certainty_weighting: true,
            ..Default::default()
        };
        let plain = sim_loss(&w, &target, &off).unwrap();
        let weighted = sim_loss(&w, &target, &on).unwrap();
        // entry (0,1) has certainty 0.5, the rest 1
        assert!((plain - weighted - 0.5 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn total_is_sum_of_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ds = random_dataset(&mut rng, 30, 3);
        let k = PriorTarget::new(
            names(3),
            array![[0.0, 1.0, 0.0], [0.0, 0.0, 0.5], [1.0, 0.0, 0.0]],
        )
        .unwrap();
        let w = WeightMatrix::new(Array2::from_shape_fn((3, 3), |_| {
            rng.random_range(-1.0..1.0)
        }))
        .unwrap();
        let cfg = SolverConfig {
            lambda_sparsity: 0.3,
            lambda_sim: 0.7,
            ..Default::default()
        };
        let separate = fitting_loss(&w, &ds).unwrap()
            + 0.3 * w.l1_norm()
            + 0.7 * sim_loss(&w, &k, &cfg).unwrap();
        assert!((total_objective(&w, &ds, Some(&k), &cfg).unwrap() - separate).abs() < 1e-12);

        let no_sim = SolverConfig {
            lambda_sim: 0.0,
            ..cfg.clone()
        };
        assert_eq!(
            total_objective(&w, &ds, Some(&k), &no_sim).unwrap(),
            fitting_loss(&w, &ds).unwrap() + 0.3 * w.l1_norm()
        );

        let zero_data = Dataset::new(names(3), Array2::zeros((5, 3))).unwrap();
        let only_sim = SolverConfig {
            lambda_sparsity: 0.0,
            ..cfg
        };
        assert_eq!(
            total_objective(&w, &zero_data, Some(&k), &only_sim).unwrap(),
            0.7 * sim_loss(&w, &k, &only_sim).unwrap()
        );
    }

    #[test]
    fn gradient_reduces_to_penalty_on_zero_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let w = WeightMatrix::new(Array2::from_shape_fn((4, 4), |_| {
            rng.random_range(-1.0..1.0)
        }))
        .unwrap();
        let zero_data = Dataset::new(names(4), Array2::zeros((3, 4))).unwrap();
        let k = PriorTarget::new(names(4), Array2::zeros((4, 4))).unwrap();
        let cfg = SolverConfig {
            lambda_sparsity: 0.0,
            lambda_sim: 0.0,
            activation: Activation::Clamp01,
            ..Default::default()
        };
        let (rho, alpha) = (3.0, 0.25);
        let g = objective_gradient(&w, &zero_data, Some(&k), &cfg, rho, alpha).unwrap();
        let h = crate::graph::acyclicity_value(&w).unwrap();
        let expected = acyclicity_gradient(&w).unwrap().as_array() * (rho * h + alpha);
        assert_eq!(g.as_array(), &expected);
        assert!(g.as_array().diag().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn init_scales_prior() {
        let k = PriorTarget::<f64>::new(names(2), array![[0.0, 1.0], [0.5, 0.0]]).unwrap();
        assert_eq!(init_from_prior(&k, 0.0).unwrap(), WeightMatrix::zeros(2));
        assert_eq!(init_from_prior(&k, 1.0).unwrap().as_array(), k.values());
        assert_eq!(init_from_prior(&k, 0.3).unwrap().get(1, 0), 0.15);
        assert!(init_from_prior(&k, -1.0).is_err());
    }

    #[test]
    fn shape_mismatch_errors() {
        let ds = Dataset::new(names(2), Array2::zeros((3, 2))).unwrap();
        let w = WeightMatrix::<f64>::zeros(3);
        assert!(fitting_loss(&w, &ds).is_err());
        let k = PriorTarget::<f64>::new(names(2), Array2::zeros((2, 2))).unwrap();
        assert!(sim_loss(&w, &k, &SolverConfig::default()).is_err());
        assert!(PriorTarget::<f64>::new(names(2), array![[0.0, 2.0], [0.0, 0.0]]).is_err());
    }
}
