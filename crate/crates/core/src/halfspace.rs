//! Rényi-2 information between two opposite half-spaces (per unit edge
//! length) and between a half-space and a small distant disk, in `d = 2`.
//!
//! Plane waves are labelled by the imaginary angle `alpha`; the `k_x`
//! integral is done analytically, `int_0^inf dk e^{-k l S} = 1/(l S)`, so every
//! result scales exactly as `1/l`.
//!
//! The second-reflection term needs `int d^4 alpha (cyclic product of four
//! kernels) / sum_i cosh(alpha_i)`. Writing `1/S = int_0^inf dt e^{-t S}` turns
//! the integrand into `Tr[(W_t C)^4]` with `W_t = diag(e^{-t cosh alpha})`, which
//! is evaluated as a Nyström matrix product on the Gauss–Legendre grid and a
//! one-dimensional quadrature in `ln t`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disk_multipole::BoundaryCondition;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

/// Nodes of the `ln t` rule used for the Laplace variable of `1/sum cosh`.
const LOG_T_NODES: usize = 160;
const LOG_T_MIN: f64 = -45.0;
const LOG_T_MAX: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpacePairGeometry {
    pub separation: f64,
}

impl HalfSpacePairGeometry {
    pub fn new(separation: f64) -> Result<Self> {
        if separation > 0.0 && separation.is_finite() {
            Ok(Self { separation })
        } else {
            Err(Error::InvalidGeometry(format!("half-space separation l = {separation} must be positive")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskHalfSpaceGeometry {
    pub disk_radius: f64,
    pub separation: f64,
}

impl DiskHalfSpaceGeometry {
    pub fn new(disk_radius: f64, separation: f64) -> Result<Self> {
        if !(disk_radius > 0.0 && disk_radius.is_finite()) {
            return Err(Error::InvalidGeometry(format!("disk radius R = {disk_radius} must be positive")));
        }
        if !(separation > 0.0 && separation.is_finite()) {
            return Err(Error::InvalidGeometry(format!("separation l = {separation} must be positive")));
        }
        Ok(Self { disk_radius, separation })
    }

    /// `R/l < 1` is where the monopole-only result is meaningful.
    pub fn in_asymptotic_regime(&self) -> bool {
        self.disk_radius / self.separation < 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Integration range `[-alpha_cutoff, alpha_cutoff]` for every angle.
    pub alpha_cutoff: f64,
    pub nodes_per_axis: usize,
    /// Relative change allowed when the node count is doubled.
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { alpha_cutoff: 40.0, nodes_per_axis: 200, tolerance: 1e-8 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_cutoff > 0.0) || self.nodes_per_axis == 0 || !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!("invalid quadrature spec {self:?}")));
        }
        // slowest direction is the diagonal, where the integrands fall off as e^{-alpha}
        let tail = (-self.alpha_cutoff).exp();
        if tail >= 1e-14 {
            return Err(Error::InvalidParameter(format!(
                "alpha cutoff {} leaves integrand tail {tail:e} above 1e-14 of its peak",
                self.alpha_cutoff
            )));
        }
        Ok(())
    }

    fn doubled(&self) -> Self {
        Self { nodes_per_axis: 2 * self.nodes_per_axis, ..*self }
    }
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// Half-space capacitance kernel `(1/4 pi)[sech((a+a')/2) +- sech((a-a')/2)]`.
pub fn kernel_c(bc: BoundaryCondition, alpha: f64, alpha_prime: f64) -> f64 {
    let s = sech(0.5 * (alpha + alpha_prime));
    let d = sech(0.5 * (alpha - alpha_prime));
    match bc {
        BoundaryCondition::Dirichlet => (s + d) / (4.0 * PI),
        BoundaryCondition::Neumann => (s - d) / (4.0 * PI),
    }
}

/// Values split by boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorValues {
    pub total: f64,
    pub dirichlet: f64,
    pub neumann: f64,
}

impl SectorValues {
    fn from_parts(dirichlet: f64, neumann: f64) -> Self {
        Self { total: dirichlet + neumann, dirichlet, neumann }
    }
}

fn check_doubling(coarse: f64, fine: f64, tol: f64) -> Result<()> {
    let rel_change = ((fine - coarse) / fine).abs();
    if rel_change > tol {
        Err(Error::QuadratureNotConverged { rel_change, tol })
    } else {
        Ok(())
    }
}

/// `sum_{i,j} w_i w_j f(a_i, a_j)` on the tensor Gauss–Legendre grid.
fn tensor_2d(quad: &QuadratureSpec, f: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
    let (x, w) = gauss_legendre_on(quad.nodes_per_axis, -quad.alpha_cutoff, quad.alpha_cutoff);
    x.par_iter()
        .zip(w.par_iter())
        .map(|(&a, &wa)| wa * x.iter().zip(&w).map(|(&b, &wb)| wb * f(a, b)).sum::<f64>())
        .sum()
}

/// `int int da da' C(a,a') C(a',a) / (cosh a + cosh a')` for one sector.
fn first_reflection_integral(bc: BoundaryCondition, quad: &QuadratureSpec) -> f64 {
    tensor_2d(quad, |a, b| {
        let c = kernel_c(bc, a, b);
        c * c / (a.cosh() + b.cosh())
    })
}

fn first_reflection_parts(quad: &QuadratureSpec) -> SectorValues {
    // I2/Sigma = sum_bc (1/(2 pi l)) * integral, evaluated at l = 1
    let d = first_reflection_integral(BoundaryCondition::Dirichlet, quad) / (2.0 * PI);
    let n = first_reflection_integral(BoundaryCondition::Neumann, quad) / (2.0 * PI);
    SectorValues::from_parts(d, n)
}

/// Single-reflection Rényi information per unit edge length; `1/(16 pi l)` exactly.
pub fn first_reflection_halfspaces_by_bc(geom: HalfSpacePairGeometry, quad: &QuadratureSpec) -> Result<SectorValues> {
    quad.validate()?;
    let coarse = first_reflection_parts(quad);
    let fine = first_reflection_parts(&quad.doubled());
    check_doubling(coarse.total, fine.total, quad.tolerance)?;
    let l = geom.separation;
    Ok(SectorValues::from_parts(fine.dirichlet / l, fine.neumann / l))
}

pub fn first_reflection_halfspaces(geom: HalfSpacePairGeometry, quad: &QuadratureSpec) -> Result<f64> {
    first_reflection_halfspaces_by_bc(geom, quad).map(|v| v.total)
}

/// `int_0^inf dt Tr[(W_t C)^power]` on the Gauss–Legendre grid of `quad`.
pub(crate) fn laplace_trace(bc: BoundaryCondition, quad: &QuadratureSpec, power: u32) -> f64 {
    let (x, w) = gauss_legendre_on(quad.nodes_per_axis, -quad.alpha_cutoff, quad.alpha_cutoff);
    let n = x.len();
    let kernel = DMatrix::from_fn(n, n, |i, j| w[i].sqrt() * kernel_c(bc, x[i], x[j]) * w[j].sqrt());
    let cosh: Vec<f64> = x.iter().map(|a| a.cosh()).collect();
    let (s_nodes, s_weights) = gauss_legendre_on(LOG_T_NODES, LOG_T_MIN, LOG_T_MAX);
    s_nodes
        .par_iter()
        .zip(s_weights.par_iter())
        .map(|(&s, &ws)| {
            let t = s.exp();
            let damp: Vec<f64> = cosh.iter().map(|c| (-0.5 * t * c).exp()).collect();
            // symmetric form W^{1/2} C W^{1/2}
            let m = DMatrix::from_fn(n, n, |i, j| damp[i] * kernel[(i, j)] * damp[j]);
            let tr = match power {
                2 => m.norm_squared(),
                4 => (&m * &m).norm_squared(),
                _ => {
                    let mut p = m.clone();
                    for _ in 1..power {
                        p = &p * &m;
                    }
                    p.trace()
                }
            };
            ws * t * tr
        })
        .sum()
}

fn second_reflection_parts(quad: &QuadratureSpec) -> SectorValues {
    // (1/(4 pi l)) int_0^inf dt Tr[(W_t C)^4], at l = 1
    let d = laplace_trace(BoundaryCondition::Dirichlet, quad, 4) / (4.0 * PI);
    let n = laplace_trace(BoundaryCondition::Neumann, quad, 4) / (4.0 * PI);
    SectorValues::from_parts(d, n)
}

/// The `Tr(N^2)/2` term of the multiple-reflection series, per unit edge length.
pub fn second_reflection_halfspaces_by_bc(geom: HalfSpacePairGeometry, quad: &QuadratureSpec) -> Result<SectorValues> {
    quad.validate()?;
    let coarse = second_reflection_parts(quad);
    let fine = second_reflection_parts(&quad.doubled());
    check_doubling(coarse.total, fine.total, quad.tolerance)?;
    let l = geom.separation;
    Ok(SectorValues::from_parts(fine.dirichlet / l, fine.neumann / l))
}

pub fn second_reflection_halfspaces(geom: HalfSpacePairGeometry, quad: &QuadratureSpec) -> Result<f64> {
    second_reflection_halfspaces_by_bc(geom, quad).map(|v| v.total)
}

/// Area-law coefficient through two reflections, `l * (first + second)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaCoefficient {
    pub first_reflection: SectorValues,
    pub second_reflection: SectorValues,
    pub a2_coefficient: f64,
}

pub fn area_coefficient(quad: &QuadratureSpec) -> Result<AreaCoefficient> {
    let unit = HalfSpacePairGeometry { separation: 1.0 };
    let first_reflection = first_reflection_halfspaces_by_bc(unit, quad)?;
    let second_reflection = second_reflection_halfspaces_by_bc(unit, quad)?;
    Ok(AreaCoefficient {
        first_reflection,
        second_reflection,
        a2_coefficient: first_reflection.total + second_reflection.total,
    })
}

/// Electrostatic capacitance `2R/pi` of a disk in three dimensions.
pub fn disk_capacitance_monopole(radius: f64) -> Result<f64> {
    if radius > 0.0 && radius.is_finite() {
        Ok(2.0 * radius / PI)
    } else {
        Err(Error::Domain(format!("disk radius {radius} must be positive")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskHalfSpaceResult {
    pub i2: f64,
    /// `int int [sech((a+a')/2) + sech((a-a')/2)] / (cosh a + cosh a')`, analytically `4 pi`.
    pub double_integral: f64,
    /// Size of the neglected `O((R/l)^2)` relative corrections.
    pub truncation_error: f64,
    pub warning: Option<String>,
}

fn disk_halfspace_integral(quad: &QuadratureSpec) -> f64 {
    tensor_2d(quad, |a, b| (sech(0.5 * (a + b)) + sech(0.5 * (a - b))) / (a.cosh() + b.cosh()))
}

/// Dirichlet-monopole, single-reflection Rényi information between a half-space
/// and a small disk: `C0/(8 pi^2 l) * double_integral = R/(pi^2 l)`.
pub fn disk_halfspace(geom: DiskHalfSpaceGeometry, quad: &QuadratureSpec) -> Result<DiskHalfSpaceResult> {
    quad.validate()?;
    let coarse = disk_halfspace_integral(quad);
    let fine = disk_halfspace_integral(&quad.doubled());
    check_doubling(coarse, fine, quad.tolerance)?;
    let c0 = disk_capacitance_monopole(geom.disk_radius)?;
    let ratio = geom.disk_radius / geom.separation;
    let warning = (!geom.in_asymptotic_regime())
        .then(|| format!("R/l = {ratio} is not small; the monopole result is only indicative"));
    Ok(DiskHalfSpaceResult {
        i2: c0 / (8.0 * PI * PI * geom.separation) * fine,
        double_integral: fine,
        truncation_error: ratio * ratio,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn kernel_values_and_symmetry() {
        assert!((kernel_c(BoundaryCondition::Dirichlet, 0.0, 0.0) - 1.0 / (2.0 * PI)).abs() < 1e-16);
        assert_eq!(kernel_c(BoundaryCondition::Neumann, 0.0, 0.0), 0.0);
        for &(a, b) in &[(0.3, -1.2), (2.0, 5.0), (-4.0, 0.1)] {
            for bc in BoundaryCondition::ALL {
                let k = kernel_c(bc, a, b);
                assert_eq!(k, kernel_c(bc, b, a));
                assert!((k - kernel_c(bc, -a, -b)).abs() < 1e-17);
                assert!(k.abs() <= 1.0 / (2.0 * PI));
            }
            assert!(kernel_c(BoundaryCondition::Dirichlet, a, b) > 0.0);
            let diag = kernel_c(BoundaryCondition::Neumann, a, a);
            assert!((diag - (sech(a) - 1.0) / (4.0 * PI)).abs() < 1e-16 && diag <= 0.0);
        }
    }

    #[test]
    fn first_reflection_matches_closed_form() {
        // rotating to u = a + a', v = a - a' separates the integrals:
        // Dirichlet pi^2 + 8, Neumann pi^2 - 8, each divided by 32 pi^3 l
        let quad = QuadratureSpec::default();
        for &l in &[0.5, 1.0, 2.0, 5.0] {
            let v = first_reflection_halfspaces_by_bc(HalfSpacePairGeometry::new(l).unwrap(), &quad).unwrap();
            let scale = 32.0 * PI.powi(3) * l;
            assert!(rel(v.dirichlet, (PI * PI + 8.0) / scale) < 1e-9);
            assert!(rel(v.neumann, (PI * PI - 8.0) / scale) < 1e-8);
            assert!(rel(v.total, 1.0 / (16.0 * PI * l)) < 1e-9);
            assert!(v.dirichlet > 9.0 * v.neumann);
        }
    }

    #[test]
    fn laplace_route_reproduces_first_reflection() {
        let quad = QuadratureSpec::default();
        for bc in BoundaryCondition::ALL {
            let direct = first_reflection_integral(bc, &quad);
            let laplace = laplace_trace(bc, &quad, 2);
            assert!(rel(laplace, direct) < 1e-9, "{bc:?}: {laplace} vs {direct}");
        }
    }

    /// Brute-force 4-d tensor Gauss–Legendre quadrature of the second-reflection
    /// integrand, independent of the Laplace/Nyström route.
    fn second_reflection_brute_force(bc: BoundaryCondition, nodes: usize, cutoff: f64) -> f64 {
        let (x, w) = gauss_legendre_on(nodes, -cutoff, cutoff);
        let n = x.len();
        let k: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| kernel_c(bc, x[i], x[j])).collect()).collect();
        let c: Vec<f64> = x.iter().map(|a| a.cosh()).collect();
        let total: f64 = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..n {
                    let kij = w[i] * w[j] * k[i][j];
                    for m in 0..n {
                        let kjm = kij * w[m] * k[j][m];
                        for p in 0..n {
                            acc += kjm * w[p] * k[m][p] * k[p][i] / (c[i] + c[j] + c[m] + c[p]);
                        }
                    }
                }
                acc
            })
            .sum();
        total / (4.0 * PI)
    }

    #[test]
    fn second_reflection_matches_brute_force() {
        let quad = QuadratureSpec::default();
        let v = second_reflection_parts(&quad);
        let d = second_reflection_brute_force(BoundaryCondition::Dirichlet, 72, 24.0);
        let n = second_reflection_brute_force(BoundaryCondition::Neumann, 72, 24.0);
        assert!(rel(v.dirichlet, d) < 2e-3, "{} vs {d}", v.dirichlet);
        assert!((v.neumann - n).abs() < 2e-3 * v.dirichlet, "{} vs {n}", v.neumann);
    }

    #[test]
    fn area_coefficient_near_reported_value() {
        let a = area_coefficient(&QuadratureSpec::default()).unwrap();
        assert!((a.a2_coefficient - 0.022).abs() <= 0.001, "{a:?}");
        assert!(a.second_reflection.total < a.first_reflection.total / 5.0);
        assert!(a.second_reflection.total > 0.0);
    }

    #[test]
    fn exact_inverse_separation_scaling() {
        let quad = QuadratureSpec::default();
        let s1 = second_reflection_halfspaces(HalfSpacePairGeometry::new(1.0).unwrap(), &quad).unwrap();
        let s3 = second_reflection_halfspaces(HalfSpacePairGeometry::new(3.0).unwrap(), &quad).unwrap();
        assert!(rel(3.0 * s3, s1) < 1e-14);
    }

    #[test]
    fn disk_halfspace_chain() {
        let quad = QuadratureSpec::default();
        let r = disk_halfspace(DiskHalfSpaceGeometry::new(1.0, 10.0).unwrap(), &quad).unwrap();
        assert!(rel(r.double_integral, 4.0 * PI) < 1e-9);
        assert!(rel(r.i2, 1.0 / (10.0 * PI * PI)) < 1e-9);
        assert!((r.i2 - 0.0101321).abs() < 1e-7);
        assert!(r.warning.is_none());
        let tiny = disk_halfspace(DiskHalfSpaceGeometry::new(1e-9, 10.0).unwrap(), &quad).unwrap();
        assert!(tiny.i2 < 1e-10);
        let close = disk_halfspace(DiskHalfSpaceGeometry::new(2.0, 1.0).unwrap(), &quad).unwrap();
        assert!(close.warning.is_some());
    }

    #[test]
    #[allow(clippy::approx_constant)] // the tabulated value, not 2/pi itself
    fn capacitance_monopole() {
        assert!((disk_capacitance_monopole(1.0).unwrap() - 0.6366198).abs() < 1e-7);
        assert!((disk_capacitance_monopole(PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(disk_capacitance_monopole(0.0).is_err());
        let c = crate::disk_multipole::capacitance_disk(BoundaryCondition::Dirichlet, 0).entries()[0];
        assert!((disk_capacitance_monopole(3.0).unwrap() - 3.0 * c).abs() < 1e-15);
    }

    #[test]
    fn quadrature_validation() {
        assert!(QuadratureSpec { alpha_cutoff: 10.0, ..Default::default() }.validate().is_err());
        assert!(QuadratureSpec { nodes_per_axis: 0, ..Default::default() }.validate().is_err());
        let coarse = QuadratureSpec { nodes_per_axis: 8, ..Default::default() };
        assert!(matches!(
            first_reflection_halfspaces(HalfSpacePairGeometry::new(1.0).unwrap(), &coarse),
            Err(Error::QuadratureNotConverged { .. })
        ));
        assert!(HalfSpacePairGeometry::new(0.0).is_err());
    }
}
