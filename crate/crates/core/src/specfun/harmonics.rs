//! Orthonormal spherical harmonics with the Condon–Shortley phase.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::MultipoleIndex;
use crate::error::{Error, Result};

/// Normalized associated Legendre values `p[n][m]` for `0 <= m <= n <= n_max`
/// at `x = cos(theta)`, so that `Y_n^m = p[n][m] e^{i m phi}` for `m >= 0`.
pub(crate) fn normalized_legendre(n_max: usize, x: f64) -> Vec<Vec<f64>> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut p: Vec<Vec<f64>> = (0..=n_max).map(|n| vec![0.0; n + 1]).collect();
    // diagonal: p_mm = (-1)^m sqrt((2m+1)/(4 pi) prod_{k<=m} (2k-1)/(2k)) s^m
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=n_max {
        if m > 0 {
            pmm *= -s * ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
        }
        p[m][m] = pmm;
        if m < n_max {
            p[m + 1][m] = x * ((2 * m + 3) as f64).sqrt() * pmm;
        }
        for n in (m + 2)..=n_max {
            let nf = n as f64;
            let mf = m as f64;
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((nf - 1.0) * (nf - 1.0) - mf * mf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0)).sqrt();
            p[n][m] = a * (x * p[n - 1][m] - b * p[n - 2][m]);
        }
    }
    p
}

/// `Y_n^m(eta, phi)` where `eta` plays the role of `cos(theta)`.
pub fn sph_harm(idx: MultipoleIndex, eta: f64, phi: f64) -> Result<Complex64> {
    if !(-1.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("eta = {eta} outside [-1, 1]")));
    }
    let p = normalized_legendre(idx.n as usize, eta);
    Ok(assemble(&p, idx, phi))
}

fn assemble(p: &[Vec<f64>], idx: MultipoleIndex, phi: f64) -> Complex64 {
    let m = idx.m.unsigned_abs() as usize;
    let y = Complex64::from_polar(p[idx.n as usize][m], m as f64 * phi);
    if idx.m < 0 {
        // Y_n^{-m} = (-1)^m conj(Y_n^m)
        let c = y.conj();
        if m % 2 == 1 {
            -c
        } else {
            c
        }
    } else {
        y
    }
}

/// All `Y_n^m` for `n <= n_max` at one direction, indexed by `MultipoleIndex::flat`.
#[derive(Debug, Clone)]
pub struct HarmonicTable {
    n_max: u32,
    values: Vec<Complex64>,
}

impl HarmonicTable {
    pub fn new(n_max: u32, eta: f64, phi: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!("eta = {eta} outside [-1, 1]")));
        }
        let p = normalized_legendre(n_max as usize, eta);
        let values = MultipoleIndex::iter_up_to(n_max).map(|idx| assemble(&p, idx, phi)).collect();
        Ok(Self { n_max, values })
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn get(&self, idx: MultipoleIndex) -> Complex64 {
        debug_assert!(idx.n <= self.n_max);
        self.values[idx.flat()]
    }
}
