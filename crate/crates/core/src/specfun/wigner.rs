//! Wigner 3j symbols for integer angular momenta.

use super::factorial::ln_factorial;

fn triangle(j1: u32, j2: u32, j3: u32) -> bool {
    j3 <= j1 + j2 && j1 <= j2 + j3 && j2 <= j1 + j3
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)` from the Racah single-sum formula.
///
/// Selection-rule violations (triangle inequality, `m1 + m2 + m3 != 0`,
/// `|m_i| > j_i`) give zero.
pub fn wigner3j(j1: u32, j2: u32, j3: u32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0 || !triangle(j1, j2, j3) {
        return 0.0;
    }
    let (j1, j2, j3) = (j1 as i64, j2 as i64, j3 as i64);
    let (m1, m2, m3) = (m1 as i64, m2 as i64, m3 as i64);
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    // (j1 j2 j3; 0 0 0) vanishes for odd j1 + j2 + j3
    if m1 == 0 && m2 == 0 && (j1 + j2 + j3) % 2 == 1 {
        return 0.0;
    }

    let lf = |k: i64| ln_factorial(k as usize);
    let ln_delta = lf(j1 + j2 - j3) + lf(j1 - j2 + j3) + lf(-j1 + j2 + j3) - lf(j1 + j2 + j3 + 1);
    let ln_pref = 0.5
        * (ln_delta
            + lf(j1 + m1)
            + lf(j1 - m1)
            + lf(j2 + m2)
            + lf(j2 - m2)
            + lf(j3 + m3)
            + lf(j3 - m3));

    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    if k_min > k_max {
        return 0.0;
    }

    let mut sum = 0.0;
    for k in k_min..=k_max {
        let ln_den = lf(k)
            + lf(j3 - j2 + k + m1)
            + lf(j3 - j1 + k - m2)
            + lf(j1 + j2 - j3 - k)
            + lf(j1 - k - m1)
            + lf(j2 - k + m2);
        let term = (ln_pref - ln_den).exp();
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if (j1 - j2 - m3).rem_euclid(2) == 1 {
        -sum
    } else {
        sum
    }
}
