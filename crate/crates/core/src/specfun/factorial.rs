//! Log-factorials and Gamma values at integer and half-integer arguments.

use std::sync::OnceLock;

const TABLE_LEN: usize = 1024;

fn table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE_LEN);
        let mut acc = 0.0_f64;
        t.push(0.0);
        for k in 1..TABLE_LEN {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(k!)`.
pub fn ln_factorial(k: usize) -> f64 {
    assert!(k < TABLE_LEN, "ln_factorial argument {k} out of table range");
    table()[k]
}

/// `ln((2k-1)!!)`, with `(-1)!! = 1`.
pub fn ln_double_factorial_odd(k: usize) -> f64 {
    // (2k-1)!! = (2k)! / (2^k k!)
    ln_factorial(2 * k) - (k as f64) * std::f64::consts::LN_2 - ln_factorial(k)
}

/// `ln Γ(t/2)` for a positive integer `t` (integer or half-integer argument).
pub fn ln_gamma_half(t: usize) -> f64 {
    assert!(t > 0, "Gamma has a pole at zero");
    if t % 2 == 0 {
        ln_factorial(t / 2 - 1)
    } else {
        // Γ(k + 1/2) = (2k)! sqrt(pi) / (4^k k!)
        let k = (t - 1) / 2;
        ln_factorial(2 * k) + 0.5 * std::f64::consts::PI.ln()
            - (k as f64) * 4f64.ln()
            - ln_factorial(k)
    }
}
