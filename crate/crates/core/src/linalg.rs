//! Complex log-determinants of `I - N` for reflection operators.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Below this Frobenius norm (and dimension) the multiple-reflection series is
/// summed directly; it keeps full relative precision when `log det` is tiny.
const SERIES_NORM: f64 = 0.25;
const SERIES_MAX_DIM: usize = 256;

/// `log det(I - n)` as a complex number (principal branch per LU pivot).
pub fn log_det_i_minus(n: &DMatrix<Complex64>) -> Complex64 {
    assert!(n.is_square(), "log_det_i_minus needs a square matrix");
    let dim = n.nrows();
    if dim == 0 {
        return Complex64::new(0.0, 0.0);
    }
    if n.norm() < SERIES_NORM && dim <= SERIES_MAX_DIM {
        return -reflection_series(n);
    }
    let a = DMatrix::<Complex64>::identity(dim, dim) - n;
    let lu = a.lu();
    let u = lu.u();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        acc += u[(i, i)].ln();
    }
    // row swaps contribute a sign
    let swaps = lu.p().len();
    if swaps % 2 == 1 {
        acc += Complex64::new(0.0, std::f64::consts::PI);
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    acc.im = acc.im - two_pi * (acc.im / two_pi).round();
    acc
}

/// `sum_k Tr(n^k) / k`, i.e. `-log det(I - n)`, for `||n|| < 1/4`.
fn reflection_series(n: &DMatrix<Complex64>) -> Complex64 {
    let mut power = n.clone();
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..200 {
        sum += power.trace() / k as f64;
        // |Tr(N^k)| <= sqrt(dim) ||N^k||_F bounds every remaining term
        let bound = power.norm() * (n.nrows() as f64).sqrt() / k as f64;
        if bound <= 1e-18 * sum.norm() || bound == 0.0 {
            break;
        }
        power = &power * n;
    }
    sum
}

/// Real `log det(I - n)` for an operator whose spectrum is real and inside the
/// unit disk. Fails with `NonConvergent` when the imaginary part does not vanish
/// or the determinant is not positive.
pub fn real_log_det_i_minus(n: &DMatrix<Complex64>) -> Result<f64> {
    let ld = log_det_i_minus(n);
    if !ld.re.is_finite() {
        return Err(Error::NonConvergent("det(I - N) is zero or not finite".into()));
    }
    if ld.im.abs() > 1e-10 * ld.re.abs().max(1.0) {
        return Err(Error::NonConvergent(format!(
            "log det(I - N) has imaginary part {:e} (det not positive real)",
            ld.im
        )));
    }
    Ok(ld.re)
}

/// Spectral radius estimate by power iteration.
pub fn spectral_radius(n: &DMatrix<Complex64>, iterations: usize) -> f64 {
    let dim = n.nrows();
    if dim == 0 {
        return 0.0;
    }
    // deterministic start vector with no special alignment to the basis
    let mut v = nalgebra::DVector::from_fn(dim, |i, _| {
        Complex64::new(1.0 + 0.37 * (i as f64).sin(), 0.21 * (i as f64 * 1.3).cos())
    });
    v /= Complex64::from(v.norm());
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let w = n * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        estimate = norm;
        v = w / Complex64::from(norm);
    }
    estimate
}
