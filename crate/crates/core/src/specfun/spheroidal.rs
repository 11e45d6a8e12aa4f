//! Regular and outgoing radial functions of the Laplace equation in oblate
//! spheroidal coordinates, in the normalization where
//!
//! ```text
//! 1 / (4 pi |x - x'|) = sum_{n,m} j_n^m(xi_<) h_n^m(xi_>) conj(Y_n^m(eta, phi)) Y_n^m(eta', phi')
//! ```
//!
//! for a unit-radius disk at `xi = 0`. Both functions are real and nonnegative
//! for `xi >= 0`; at large `xi` they behave as `xi^n / (2n+1)!!` and
//! `(2n-1)!! / xi^(n+1)`, and satisfy `(1 + xi^2) (j' h - j h') = 1`.
//!
//! `j` is evaluated by upward recurrence in `n` (all terms positive). `h` uses the
//! hypergeometric representation
//! `h_n^m = (2n-1)!! (1+xi^2)^{-(n+1)/2} 2F1((n-m+1)/2, (n+m+1)/2; n+3/2; 1/(1+xi^2))`,
//! switching to the connection formula about `1/(1+xi^2) = 1` near the disk.

use super::factorial::{ln_double_factorial_odd, ln_gamma_half};
use super::MultipoleIndex;
use crate::error::{Error, Result};

const SERIES_TOL: f64 = 1e-17;
const SERIES_MAX_TERMS: usize = 100_000_000;
const CONNECTION_MAX_RATIO: f64 = 0.05;

fn check_xi(xi: f64) -> Result<()> {
    if xi >= 0.0 && xi.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("xi = {xi} must be finite and nonnegative")))
    }
}

/// `(j_n^m(xi), d/dxi j_n^m(xi))` by upward recurrence from `n = |m|`.
pub fn j_fn_with_deriv(idx: MultipoleIndex, xi: f64) -> Result<(f64, f64)> {
    check_xi(xi)?;
    Ok(j_unchecked(idx.n, idx.m.unsigned_abs(), xi))
}

fn j_unchecked(n: u32, m: u32, xi: f64) -> (f64, f64) {
    let mf = m as f64;
    let q = 1.0 + xi * xi;
    let start = (-ln_double_factorial_odd(m as usize + 1)).exp();
    let mut j = q.powf(mf / 2.0) * start;
    let mut dj = if m == 0 { 0.0 } else { mf * xi * q.powf(mf / 2.0 - 1.0) * start };
    let (mut j_prev, mut dj_prev) = (0.0, 0.0);
    for k in m..n {
        let kf = k as f64;
        let c = (kf * kf - mf * mf) / ((2.0 * kf - 1.0) * (2.0 * kf + 1.0));
        let d = (2.0 * kf + 1.0) * (2.0 * kf + 3.0);
        let j_next = (xi * (2.0 * kf + 1.0) * j + c * j_prev) / d;
        let dj_next = ((2.0 * kf + 1.0) * (j + xi * dj) + c * dj_prev) / d;
        j_prev = j;
        dj_prev = dj;
        j = j_next;
        dj = dj_next;
    }
    (j, dj)
}

/// Regular radial function `j_n^m(xi)`.
pub fn j_fn(idx: MultipoleIndex, xi: f64) -> Result<f64> {
    j_fn_with_deriv(idx, xi).map(|(j, _)| j)
}

/// `d/dxi j_n^m` at the disk, `xi = 0`.
pub fn j_fn_deriv(idx: MultipoleIndex) -> f64 {
    j_unchecked(idx.n, idx.m.unsigned_abs(), 0.0).1
}

/// Gauss hypergeometric series with nonnegative terms (`a, b, c > 0`, `0 <= x < 1`).
fn hyp2f1_positive(a: f64, b: f64, c: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
        sum += term;
        if term <= SERIES_TOL * sum && (a + kf) * (b + kf) * x <= (c + kf) * (kf + 1.0) {
            return sum;
        }
    }
    sum
}

/// Connection coefficients `(A, B)` of the hypergeometric factor about `x = 1`,
/// in log-magnitude form. `A > 0`, `B < 0`.
fn connection_ln(n: u32, m: u32) -> (f64, f64) {
    // with a = (n-m+1)/2, b = (n+m+1)/2, c = n+3/2:
    // A = Γ(c) Γ(1/2) / (Γ(c-a) Γ(c-b)),  B = Γ(c) Γ(-1/2) / (Γ(a) Γ(b))
    let (n, m) = (n as usize, m as usize);
    let ln_gc = ln_gamma_half(2 * n + 3);
    let ln_sqrt_pi = ln_gamma_half(1);
    let ln_a = ln_gc + ln_sqrt_pi - ln_gamma_half(n + m + 2) - ln_gamma_half(n - m + 2);
    let ln_b = ln_gc + ln_sqrt_pi + 2f64.ln() - ln_gamma_half(n - m + 1) - ln_gamma_half(n + m + 1);
    (ln_a, ln_b)
}

fn h_unchecked(n: u32, m: u32, xi: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let a = (nf - mf + 1.0) / 2.0;
    let b = (nf + mf + 1.0) / 2.0;
    let c = nf + 1.5;
    let q = 1.0 + xi * xi;
    let x = 1.0 / q;
    let ln_k = ln_double_factorial_odd(n as usize);
    let ln_pref = ln_k - (nf + 1.0) / 2.0 * q.ln();
    if x <= 0.5 {
        return (ln_pref.exp()) * hyp2f1_positive(a, b, c, x);
    }
    // 2F1(a,b;c;x) = A 2F1(a,b;1/2;y) - |B| y^{1/2} 2F1(c-a,c-b;3/2;y),  y = 1 - x.
    // The two terms nearly cancel unless |B| sqrt(y) << A, so the connection
    // formula is used only very close to the disk; elsewhere the (slowly
    // converging, positive) direct series is summed.
    let y = xi * xi / q;
    let (ln_a, ln_b) = connection_ln(n, m);
    if (ln_b - ln_a).exp() * y.sqrt() > CONNECTION_MAX_RATIO {
        return ln_pref.exp() * hyp2f1_positive(a, b, c, x);
    }
    let f1 = hyp2f1_positive(a, b, 0.5, y);
    let f2 = hyp2f1_positive(c - a, c - b, 1.5, y);
    let t1 = (ln_pref + ln_a).exp() * f1;
    let t2 = (ln_pref + ln_b).exp() * y.sqrt() * f2;
    t1 - t2
}

/// Outgoing radial function `h_n^m(xi)`.
pub fn h_fn(idx: MultipoleIndex, xi: f64) -> Result<f64> {
    check_xi(xi)?;
    Ok(h_unchecked(idx.n, idx.m.unsigned_abs(), xi))
}

/// `ln h_n^m(xi)` for `xi` away from the disk; avoids overflow of `(2n-1)!!`
/// at high degree.
pub(crate) fn ln_h_far(n: u32, m: u32, xi: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let q = 1.0 + xi * xi;
    let x = 1.0 / q;
    if x <= 0.5 {
        ln_double_factorial_odd(n as usize) - (nf + 1.0) / 2.0 * q.ln()
            + hyp2f1_positive((nf - mf + 1.0) / 2.0, (nf + mf + 1.0) / 2.0, nf + 1.5, x).ln()
    } else {
        h_unchecked(n, m, xi).ln()
    }
}

/// `h_n^m(0)`.
pub fn h_at_disk(idx: MultipoleIndex) -> f64 {
    let (ln_a, _) = connection_ln(idx.n, idx.m.unsigned_abs());
    (ln_double_factorial_odd(idx.n as usize) + ln_a).exp()
}

/// `d/dxi h_n^m` at `xi = 0`. Always negative.
pub fn h_fn_deriv(idx: MultipoleIndex) -> f64 {
    let (_, ln_b) = connection_ln(idx.n, idx.m.unsigned_abs());
    -(ln_double_factorial_odd(idx.n as usize) + ln_b).exp()
}
