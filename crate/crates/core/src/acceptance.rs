//! The fourteen acceptance checks, runnable from tests and from the CLI.
//!
//! Tolerances are fixed here; every check reports what it measured so a
//! failure can be read without rerunning.

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::disk_multipole::{
    capacitance_disk, renyi2_sector, renyi2_two_disks, separation_sweep, subleading_coefficient,
    translation_matrix, BoundaryCondition, DiskPairGeometry,
};
use crate::error::Result;
use crate::halfspace::{area_coefficient, disk_halfspace, first_reflection_halfspaces, DiskHalfSpaceGeometry, HalfSpacePairGeometry, QuadratureSpec};
use crate::quadrature::gauss_legendre_on;
use crate::specfun::{h_fn, j_fn, sph_harm, wigner3j, MultipoleIndex};
use crate::worldline::{estimate_mutual, inequality_suite, two_disk_regions, PlanarRegion, SamplingParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<34} {:>8.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str); 14] = [
    (1, "disk capacitances"),
    (2, "translation closed form"),
    (3, "two-disk leading asymptote"),
    (4, "two-disk subleading coefficient"),
    (5, "truncation convergence"),
    (6, "monotonicity and positivity"),
    (7, "Neumann decay exponent"),
    (8, "half-space first reflection"),
    (9, "half-space two-reflection coeff"),
    (10, "disk vs half-space"),
    (11, "worldline cross-validation"),
    (12, "worldline exponent"),
    (13, "inequality suite"),
    (14, "property suites"),
];

/// Runs one criterion; unknown ids fail.
pub fn run_criterion(id: u8) -> CriterionOutcome {
    let start = Instant::now();
    let result = match id {
        1 => disk_capacitances(),
        2 => translation_closed_form(),
        3 => leading_asymptote(),
        4 => subleading(),
        5 => truncation(),
        6 => monotonicity(),
        7 => neumann_exponent(),
        8 => halfspace_first(),
        9 => halfspace_a2(),
        10 => disk_vs_halfspace(),
        11 => worldline_cross_validation(),
        12 => worldline_exponent(),
        13 => inequalities(),
        14 => property_suites(),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome {
        id,
        name: CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1).to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all() -> Vec<CriterionOutcome> {
    CRITERIA.iter().map(|&(id, _)| run_criterion(id)).collect()
}

type Check = Result<(bool, String)>;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn idx(n: u32, m: i32) -> MultipoleIndex {
    MultipoleIndex { n, m }
}

fn disk_capacitances() -> Check {
    let d = capacitance_disk(BoundaryCondition::Dirichlet, 1);
    let n = capacitance_disk(BoundaryCondition::Neumann, 1);
    let nonzero = [
        (d.get(idx(0, 0)), 2.0 / PI),
        (d.get(idx(1, 1)), 4.0 / (9.0 * PI)),
        (d.get(idx(1, -1)), 4.0 / (9.0 * PI)),
        (n.get(idx(1, 0)), -2.0 / (9.0 * PI)),
    ];
    let zeros = [d.get(idx(1, 0)), n.get(idx(0, 0)), n.get(idx(1, 1)), n.get(idx(1, -1))];
    let worst = nonzero.iter().map(|&(a, b)| rel(a, b)).fold(0.0, f64::max);
    let zero_max = zeros.iter().map(|z| z.abs()).fold(0.0, f64::max);
    Ok((worst <= 1e-12 && zero_max == 0.0, format!("max rel err {worst:.2e}, max |zero entry| {zero_max:.1e}")))
}

fn translation_closed_form() -> Check {
    let mut worst = 0.0f64;
    for &r in &[2.05, 3.0, 10.0, 100.0] {
        let geom = DiskPairGeometry::new(r)?;
        let u = translation_matrix(geom.xi0(), 0.0, PI / 2.0, 0)?;
        let v = u.get(idx(0, 0), idx(0, 0));
        worst = worst.max((v.re - (1.0 / r).asin()).abs()).max(v.im.abs());
    }
    Ok((worst <= 1e-10, format!("max |U0000 - arcsin(R/r)| = {worst:.2e}")))
}

fn leading_asymptote() -> Check {
    let r = 40.0;
    let i2 = renyi2_two_disks(DiskPairGeometry::new(r)?, 3)?;
    let ratio = i2 * r * r * PI * PI / 2.0;
    Ok(((0.99..=1.01).contains(&ratio), format!("I2 r^2 pi^2/2 = {ratio:.6}")))
}

fn subleading() -> Check {
    let r = 10.0;
    let i2 = renyi2_two_disks(DiskPairGeometry::new(r)?, 10)?;
    let coeff = (i2 - 2.0 / (PI * PI * r * r)) * r.powi(4);
    let target = subleading_coefficient();
    let err = rel(coeff, target);
    Ok((err <= 0.05, format!("coefficient {coeff:.5} vs {target:.5} ({:.2}%)", 100.0 * err)))
}

fn truncation() -> Check {
    let geom = DiskPairGeometry::new(2.5)?;
    let lo = renyi2_two_disks(geom, 15)?;
    let hi = renyi2_two_disks(geom, 25)?;
    let change = rel(lo, hi);
    Ok((change < 0.01, format!("I2(15) = {lo:.9}, I2(25) = {hi:.9}, change {change:.2e}")))
}

fn monotonicity() -> Check {
    let grid = [2.1, 2.5, 3.0, 4.0, 5.0, 7.0, 10.0, 15.0, 20.0];
    let sweep = separation_sweep(&grid, 20);
    let mut values = Vec::with_capacity(grid.len());
    for p in sweep {
        values.push(p.result?.total);
    }
    let positive = values.iter().all(|&v| v > 0.0);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    Ok((positive && decreasing, format!("I2 = [{}]", shown.join(", "))))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn neumann_exponent() -> Check {
    let grid = [20.0, 30.0, 45.0, 70.0, 100.0];
    let mut values = Vec::new();
    for &r in &grid {
        values.push(renyi2_sector(DiskPairGeometry::new(r)?, BoundaryCondition::Neumann, 8)?);
    }
    let slope = log_log_slope(&grid, &values);
    Ok(((slope + 6.0).abs() <= 0.2, format!("slope {slope:.4}")))
}

fn halfspace_first() -> Check {
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for &l in &[0.5, 1.0, 2.0] {
        let v = first_reflection_halfspaces(HalfSpacePairGeometry::new(l)?, &quad)?;
        worst = worst.max(rel(l * v, 1.0 / (16.0 * PI)));
    }
    Ok((worst <= 1e-6, format!("max rel err of l*I2 vs 1/(16 pi): {worst:.2e}")))
}

fn halfspace_a2() -> Check {
    let a = area_coefficient(&QuadratureSpec::default())?;
    let v = a.a2_coefficient;
    let ok = (v - 0.022).abs() <= 0.001 && (0.020..=0.024).contains(&v);
    Ok((
        ok,
        format!(
            "A2 = {v:.6} (first {:.6}, second {:.6})",
            a.first_reflection.total, a.second_reflection.total
        ),
    ))
}

fn disk_vs_halfspace() -> Check {
    let (radius, l) = (1.0, 10.0);
    let r = disk_halfspace(DiskHalfSpaceGeometry::new(radius, l)?, &QuadratureSpec::default())?;
    let e1 = rel(r.i2 * l / radius, 1.0 / (PI * PI));
    let e2 = rel(r.double_integral, 4.0 * PI);
    Ok((e1 <= 1e-4 && e2 <= 1e-6, format!("I2 l/R rel err {e1:.2e}, double integral rel err {e2:.2e}")))
}

/// `2^20` placements: 32 strata of 512 loops with 64 placements each.
pub fn cross_validation_params(seed: u64) -> SamplingParams {
    SamplingParams { loops_per_stratum: 512, placements_per_loop: 64, n_strata: 32, seed, ..Default::default() }
}

fn worldline_cross_validation() -> Check {
    let params = cross_validation_params(2024);
    let raw = |r: f64| -> Result<_> {
        let (a, b) = two_disk_regions(r)?;
        Ok(estimate_mutual(&a, &b, &params)?.dirichlet)
    };
    let (ref_est, test_est) = (raw(5.0)?, raw(8.0)?);
    let m5 = renyi2_sector(DiskPairGeometry::new(5.0)?, BoundaryCondition::Dirichlet, 15)?;
    let m8 = renyi2_sector(DiskPairGeometry::new(8.0)?, BoundaryCondition::Dirichlet, 15)?;
    let predicted = m5 / ref_est.mean * test_est.mean;
    let combined = predicted * (ref_est.rel_err().powi(2) + test_est.rel_err().powi(2)).sqrt();
    let pulls = (predicted - m8).abs() / combined;
    let precise = ref_est.rel_err() <= 0.05 && test_est.rel_err() <= 0.05;
    Ok((
        pulls <= 3.0 && precise,
        format!(
            "r/R=8: worldline {predicted:.5e} vs multipole {m8:.5e} ({pulls:.2} sigma); stderr/mean {:.3} and {:.3} at {} placements",
            ref_est.rel_err(),
            test_est.rel_err(),
            test_est.n_samples
        ),
    ))
}

fn worldline_exponent() -> Check {
    let grid = [5.0, 8.0, 12.0, 20.0];
    let params = SamplingParams { loops_per_stratum: 256, placements_per_loop: 32, n_strata: 32, seed: 77, ..Default::default() };
    let mut values = Vec::new();
    let mut rels = Vec::new();
    for &r in &grid {
        let (a, b) = two_disk_regions(r)?;
        let e = estimate_mutual(&a, &b, &params)?.dirichlet;
        values.push(e.mean);
        rels.push(e.rel_err());
    }
    let slope = log_log_slope(&grid, &values);
    let worst = rels.iter().cloned().fold(0.0, f64::max);
    Ok(((slope + 2.0).abs() <= 0.3, format!("slope {slope:.3} (largest stderr/mean {worst:.3})")))
}

fn inequalities() -> Check {
    let a = PlanarRegion::disk([-3.0, 0.0], 1.0)?;
    let b = PlanarRegion::disk([0.0, 0.0], 1.0)?;
    let c = PlanarRegion::disk([3.0, 0.0], 1.0)?;
    let params = SamplingParams { loops_per_stratum: 128, placements_per_loop: 32, n_strata: 32, seed: 13, ..Default::default() };
    let rep = inequality_suite(&a, &b, &c, &params)?;
    let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    Ok((
        rep.all_passed(),
        format!(
            "{} samples, {} pointwise violations, I2(A,B) = {:.4e}, I2(A,B,C) = {:.4e}{}",
            rep.samples,
            rep.pointwise_violations,
            rep.i2_ab,
            rep.i2_abc,
            if failed.is_empty() { String::new() } else { format!(", failed: {}", failed.join("; ")) }
        ),
    ))
}

/// Wigner symmetries and orthogonality for `j <= 4`.
pub fn wigner_property_errors() -> f64 {
    let mut worst = 0.0f64;
    let jmax = 4u32;
    for j1 in 0..=jmax {
        for j2 in 0..=jmax {
            for j3 in 0..=jmax {
                let phase = if (j1 + j2 + j3) % 2 == 0 { 1.0 } else { -1.0 };
                for m1 in -(j1 as i32)..=j1 as i32 {
                    for m2 in -(j2 as i32)..=j2 as i32 {
                        let m3 = -m1 - m2;
                        if m3.unsigned_abs() > j3 {
                            continue;
                        }
                        let w = wigner3j(j1, j2, j3, m1, m2, m3);
                        worst = worst
                            .max((w - wigner3j(j2, j3, j1, m2, m3, m1)).abs())
                            .max((w - phase * wigner3j(j2, j1, j3, m2, m1, m3)).abs())
                            .max((w - phase * wigner3j(j1, j2, j3, -m1, -m2, -m3)).abs());
                    }
                }
            }
        }
    }
    for j1 in 0..=jmax {
        for j2 in 0..=jmax {
            for j3 in 0..=jmax {
                for k3 in 0..=jmax {
                    for m3 in -(j3.min(k3) as i32)..=j3.min(k3) as i32 {
                        let mut sum = 0.0;
                        for m1 in -(j1 as i32)..=j1 as i32 {
                            let m2 = -m1 - m3;
                            if m2.unsigned_abs() <= j2 {
                                sum += wigner3j(j1, j2, j3, m1, m2, m3) * wigner3j(j1, j2, k3, m1, m2, m3);
                            }
                        }
                        let triangle = j3 >= j1.abs_diff(j2) && j3 <= j1 + j2;
                        let expect = if j3 == k3 && triangle { 1.0 / (2 * j3 + 1) as f64 } else { 0.0 };
                        worst = worst.max((sum - expect).abs());
                    }
                }
            }
        }
    }
    worst
}

/// Largest deviation of `int Y*_nm Y_n'm' dOmega` from the identity for `n <= n_max`.
pub fn harmonic_orthonormality_error(n_max: u32) -> Result<f64> {
    let (eta, w) = gauss_legendre_on(2 * n_max as usize + 4, -1.0, 1.0);
    let n_phi = 4 * n_max as usize + 4;
    let all: Vec<MultipoleIndex> = MultipoleIndex::iter_up_to(n_max).collect();
    let mut gram = vec![num_complex::Complex64::new(0.0, 0.0); all.len() * all.len()];
    for (&e, &we) in eta.iter().zip(&w) {
        for k in 0..n_phi {
            let phi = 2.0 * PI * k as f64 / n_phi as f64;
            let weight = we * 2.0 * PI / n_phi as f64;
            let y: Vec<_> = all.iter().map(|&i| sph_harm(i, e, phi)).collect::<Result<_>>()?;
            for a in 0..all.len() {
                for b in 0..all.len() {
                    gram[a * all.len() + b] += y[a].conj() * y[b] * weight;
                }
            }
        }
    }
    let mut worst = 0.0f64;
    for a in 0..all.len() {
        for b in 0..all.len() {
            let expect = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((gram[a * all.len() + b] - expect).norm());
        }
    }
    Ok(worst)
}

/// Smallest `j` and `h` value on `xi in [0, 50]` (step 0.1) for `n <= 20`.
pub fn radial_minimum() -> Result<f64> {
    let mut min = f64::INFINITY;
    for i in MultipoleIndex::iter_up_to(20) {
        for k in 0..=500 {
            let xi = 0.1 * k as f64;
            min = min.min(j_fn(i, xi)?).min(h_fn(i, xi)?);
        }
    }
    Ok(min)
}

fn property_suites() -> Check {
    let wigner = wigner_property_errors();
    let ylm = harmonic_orthonormality_error(8)?;
    let radial = radial_minimum()?;
    Ok((
        wigner <= 1e-12 && ylm <= 1e-10 && radial >= 0.0,
        format!("3j symmetry/orthogonality err {wigner:.1e}, Ylm orthonormality err {ylm:.1e}, min j/h {radial:.2e}"),
    ))
}
