//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13, selected from the 1-norm
//! (Higham, "The scaling and squaring method for the matrix exponential
//! revisited", SIAM J. Matrix Anal. Appl. 26(4), 2005).

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::matrix::{norm1, solve};
use crate::scalar::Scalar;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which each degree meets double-precision backward error.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

// 2^60 scaling would already mean entries far beyond anything exponentiable.
const MAX_SQUARINGS: i32 = 60;

/// `exp(m)` for a square finite matrix.
pub fn matrix_exponential<T: Scalar>(m: &ArrayView2<'_, T>) -> Result<Array2<T>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "matrix exponential of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix exponential input".into()));
    }
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    let norm = norm1(m);
    let overflow = || Error::ExpmOverflow {
        norm: norm.as_f64(),
    };
    if !norm.is_finite() {
        return Err(overflow());
    }

    let result = if let Some(&(degree, _)) = THETA.iter().find(|(_, th)| norm.as_f64() <= *th) {
        let coeffs: &[f64] = match degree {
            3 => &B3,
            5 => &B5,
            7 => &B7,
            _ => &B9,
        };
        pade_low(m, coeffs).ok_or_else(overflow)?
    } else {
        let s = (norm.as_f64() / THETA_13).log2().ceil().max(0.0) as i32;
        if s > MAX_SQUARINGS {
            return Err(overflow());
        }
        let scaled = m.mapv(|x| x / T::lit(2f64.powi(s)));
        let mut r = pade13(&scaled.view()).ok_or_else(overflow)?;
        for _ in 0..s {
            r = r.dot(&r);
        }
        r
    };
    if result.iter().any(|x| !x.is_finite()) {
        return Err(overflow());
    }
    Ok(result)
}

fn pade_low<T: Scalar>(a: &ArrayView2<'_, T>, b: &[f64]) -> Option<Array2<T>> {
    let n = a.nrows();
    let ident = Array2::<T>::eye(n);
    let a2 = a.dot(a);
    // powers[k] = A^(2k)
    let mut powers = vec![ident.clone(), a2.clone()];
    while powers.len() * 2 < b.len() {
        let next = powers.last().unwrap().dot(&a2);
        powers.push(next);
    }
    let mut u_inner = Array2::<T>::zeros((n, n));
    let mut v = Array2::<T>::zeros((n, n));
    for (k, p) in powers.iter().enumerate() {
        if 2 * k + 1 < b.len() {
            u_inner.scaled_add(T::lit(b[2 * k + 1]), p);
        }
        v.scaled_add(T::lit(b[2 * k]), p);
    }
    let u = a.dot(&u_inner);
    rational(&u, &v)
}

fn pade13<T: Scalar>(a: &ArrayView2<'_, T>) -> Option<Array2<T>> {
    let n = a.nrows();
    let b = |k: usize| T::lit(B13[k]);
    let ident = Array2::<T>::eye(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let mut t = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let mut u_inner = a6.dot(&t);
    u_inner = u_inner + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &ident * b(1);
    let u = a.dot(&u_inner);

    t = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let mut v = a6.dot(&t);
    v = v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);
    rational(&u, &v)
}

/// Solves `(V - U) R = (V + U)`.
fn rational<T: Scalar>(u: &Array2<T>, v: &Array2<T>) -> Option<Array2<T>> {
    let p = v + u;
    let q = v - u;
    solve(&q, &p)
}
