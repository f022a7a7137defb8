//! Trace-exponential acyclicity function `h(W) = tr(exp(W ∘ W)) - d` and its
//! gradient `(exp(W ∘ W))ᵀ ∘ 2W`.

use ndarray::Array2;

use super::{matrix_exponential, WeightMatrix};
use crate::error::Result;
use crate::scalar::Scalar;

fn exp_of_square<T: Scalar>(w: &WeightMatrix<T>) -> Result<Array2<T>> {
    let sq = w.as_array().mapv(|x| x * x);
    matrix_exponential(&sq.view())
}

fn value_from_exp<T: Scalar>(e: &Array2<T>) -> T {
    let d = T::from_usize_lossy(e.nrows());
    // exp of a nonnegative matrix has trace >= d; clamp rounding noise
    (e.diag().sum() - d).max(T::zero())
}

fn gradient_from_exp<T: Scalar>(w: &WeightMatrix<T>, e: &Array2<T>) -> WeightMatrix<T> {
    let two = T::lit(2.0);
    let mut g = e.t().to_owned();
    g.zip_mut_with(w.as_array(), |gij, &wij| *gij = *gij * two * wij);
    g.diag_mut().fill(T::zero());
    // finite because e and w are
    WeightMatrix { w: g }
}

/// `tr(exp(W ∘ W)) - d`; zero exactly when the support of `w` is acyclic.
pub fn acyclicity_value<T: Scalar>(w: &WeightMatrix<T>) -> Result<T> {
    Ok(value_from_exp(&exp_of_square(w)?))
}

/// Elementwise gradient of [`acyclicity_value`]. Diagonal entries are zero.
pub fn acyclicity_gradient<T: Scalar>(w: &WeightMatrix<T>) -> Result<WeightMatrix<T>> {
    Ok(gradient_from_exp(w, &exp_of_square(w)?))
}

/// Value and gradient sharing one matrix exponential.
pub fn acyclicity_value_and_gradient<T: Scalar>(
    w: &WeightMatrix<T>,
) -> Result<(T, WeightMatrix<T>)> {
    let e = exp_of_square(w)?;
    Ok((value_from_exp(&e), gradient_from_exp(w, &e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DirectedGraph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_weights(rng: &mut ChaCha8Rng, d: usize) -> WeightMatrix<f64> {
        WeightMatrix::new(Array2::from_shape_fn((d, d), |_| {
            rng.random_range(-1.0..1.0)
        }))
        .unwrap()
    }

    #[test]
    fn zero_matrix() {
        let w = WeightMatrix::<f64>::zeros(3);
        assert_eq!(acyclicity_value(&w).unwrap(), 0.0);
        assert_eq!(acyclicity_gradient(&w).unwrap(), WeightMatrix::zeros(3));
    }

    #[test]
    fn symmetric_two_cycle_closed_form() {
        let w = WeightMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        // exp([[0,1],[1,0]]) = [[cosh 1, sinh 1], [sinh 1, cosh 1]]
        let expected = 2.0 * (1f64.cosh() - 1.0);
        let h = acyclicity_value(&w).unwrap();
        assert!((h - expected).abs() < 1e-14);
        assert!((h - 1.0862).abs() < 1e-4);
    }

    #[test]
    fn strictly_upper_triangular_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut w = random_weights(&mut rng, 5);
        for i in 0..5 {
            for j in 0..=i {
                w.set(i, j, 0.0);
            }
        }
        // nilpotent: the series terminates, tr(sum) - d = 0
        let sq = w.as_array().mapv(|x| x * x);
        let mut term = Array2::<f64>::eye(5);
        let mut series_trace = 5.0;
        for k in 1..5 {
            term = term.dot(&sq) / k as f64;
            series_trace += term.diag().sum();
        }
        assert_eq!(series_trace - 5.0, 0.0);
        assert!(acyclicity_value(&w).unwrap().abs() < 1e-9);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = random_weights(&mut rng, 4);
        let g = acyclicity_gradient(&w).unwrap();
        let step = 1e-5;
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let mut plus = w.clone();
                plus.set(i, j, w.get(i, j) + step);
                let mut minus = w.clone();
                minus.set(i, j, w.get(i, j) - step);
                let fd = (acyclicity_value(&plus).unwrap() - acyclicity_value(&minus).unwrap())
                    / (2.0 * step);
                let rel = (fd - g.get(i, j)).abs() / g.get(i, j).abs().max(1e-8);
                assert!(rel <= 1e-5, "({i},{j}): fd {fd} vs {}", g.get(i, j));
            }
        }
    }

    #[test]
    fn diagonal_is_clamped_so_gradient_is_zero_there() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = random_weights(&mut rng, 4);
        let g = acyclicity_gradient(&w).unwrap();
        assert!(g.as_array().diag().iter().all(|&x| x == 0.0));
        // perturbing the diagonal is a no-op on WeightMatrix
        let mut p = w.clone();
        p.set(2, 2, 0.7);
        assert_eq!(acyclicity_value(&p).unwrap(), acyclicity_value(&w).unwrap());
    }

    #[test]
    fn value_and_gradient_agree_with_separate_calls() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = random_weights(&mut rng, 5);
        let (h, g) = acyclicity_value_and_gradient(&w).unwrap();
        assert_eq!(h, acyclicity_value(&w).unwrap());
        assert_eq!(g, acyclicity_gradient(&w).unwrap());
    }

    #[test]
    fn physics_like_dag_has_zero_h() {
        let g = DirectedGraph::from_edges(
            ["a", "b", "c", "d"],
            &[("d", "a"), ("a", "b"), ("b", "c"), ("d", "c")],
        )
        .unwrap();
        assert!(acyclicity_value(&g.to_weights::<f64>()).unwrap() < 1e-12);
    }
}
