//! Small dense-matrix helpers on top of `ndarray`.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) fn to_rows<T: Clone>(m: &ArrayView2<'_, T>) -> Vec<Vec<T>> {
    m.outer_iter().map(|r| r.to_vec()).collect()
}

pub(crate) fn from_rows<T: Clone>(rows: &[Vec<T>], what: &str) -> Result<Array2<T>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::DimensionMismatch(format!(
            "{what}: row {i} has {} entries, expected {ncols}",
            r.len()
        )));
    }
    let flat: Vec<T> = rows.iter().flat_map(|r| r.iter().cloned()).collect();
    Array2::from_shape_vec((nrows, ncols), flat)
        .map_err(|e| Error::DimensionMismatch(format!("{what}: {e}")))
}

/// Maximum absolute column sum.
pub fn norm1<T: Scalar>(m: &ArrayView2<'_, T>) -> T {
    m.columns()
        .into_iter()
        .map(|c| c.iter().fold(T::zero(), |acc, &x| acc + x.abs()))
        .fold(T::zero(), T::max)
}

/// Solves `a * x = b` for square `a` by Gaussian elimination with partial
/// pivoting. Returns `None` when `a` is numerically singular.
pub fn solve<T: Scalar>(a: &Array2<T>, b: &Array2<T>) -> Option<Array2<T>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "solve: matrix must be square");
    assert_eq!(n, b.nrows(), "solve: right-hand side rows");
    let mut a = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[(i, col)]
                    .abs()
                    .partial_cmp(&a[(j, col)].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        let p = a[(pivot, col)];
        if p == T::zero() || !p.is_finite() {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap((pivot, k), (col, k));
            }
            for k in 0..x.ncols() {
                x.swap((pivot, k), (col, k));
            }
        }
        for row in col + 1..n {
            let f = a[(row, col)] / p;
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[(col, k)];
                a[(row, k)] -= f * v;
            }
            for k in 0..x.ncols() {
                let v = x[(col, k)];
                x[(row, k)] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let p = a[(col, col)];
        for k in 0..x.ncols() {
            let mut acc = x[(col, k)];
            for j in col + 1..n {
                acc -= a[(col, j)] * x[(j, k)];
            }
            x[(col, k)] = acc / p;
        }
    }
    Some(x)
}
