//! Rényi-2 mutual information between two coplanar disks of equal radius.
//!
//! Lengths are in units of the disk radius `R`. The reflection operator
//! `N = C U+ C U-` is assembled in the oblate spheroidal partial-wave basis
//! (indices ordered lexicographically, see [`MultipoleIndex::flat`]) and
//! `I2 = -1/2 sum_{D,N} log det(I - N)`.
//!
//! Internally the matrices are rescaled by the similarity transform
//! `j -> s_n j`, `h -> h / s_n` with `s_n^2 = (2n+1)!! (2n-1)!!`, which leaves
//! `det(I - N)` unchanged but keeps entries of order one at high degree.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{real_log_det_i_minus, spectral_radius};
use crate::specfun::{
    h_at_disk, h_fn_deriv, j_fn, j_fn_deriv, ln_double_factorial_odd, ln_h_far, wigner3j, HarmonicTable,
    MultipoleIndex,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    pub const ALL: [BoundaryCondition; 2] = [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann];
}

/// `ln s_n`, the balancing scale of degree `n`.
fn ln_balance(n: u32) -> f64 {
    0.5 * (ln_double_factorial_odd(n as usize + 1) + ln_double_factorial_odd(n as usize))
}

/// Diagonal multipole response of a unit disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitanceMatrix {
    pub bc: BoundaryCondition,
    pub n_max: u32,
    entries: Vec<f64>,
}

impl CapacitanceMatrix {
    pub fn get(&self, idx: MultipoleIndex) -> f64 {
        self.entries[idx.flat()]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Entries multiplied by `s_n^2` (balanced basis).
    fn balanced(&self) -> Vec<f64> {
        MultipoleIndex::iter_up_to(self.n_max)
            .map(|idx| {
                let c = self.entries[idx.flat()];
                if c == 0.0 {
                    0.0
                } else {
                    c.signum() * (c.abs().ln() + 2.0 * ln_balance(idx.n)).exp()
                }
            })
            .collect()
    }
}

/// `C_nm = j(0)/h(0)` (Dirichlet) or `j'(0)/h'(0)` (Neumann) for all `n <= n_max`.
pub fn capacitance_disk(bc: BoundaryCondition, n_max: u32) -> CapacitanceMatrix {
    let entries = MultipoleIndex::iter_up_to(n_max)
        .map(|idx| match bc {
            BoundaryCondition::Dirichlet => j_fn(idx, 0.0).expect("xi = 0 is in the domain") / h_at_disk(idx),
            BoundaryCondition::Neumann => j_fn_deriv(idx) / h_fn_deriv(idx),
        })
        .collect();
    CapacitanceMatrix { bc, n_max, entries }
}

/// Re-expansion of outgoing waves about a displaced origin.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationMatrix {
    pub xi0: f64,
    pub eta0: f64,
    pub phi0: f64,
    pub n_max: u32,
    /// Row index `(n', m')`, column index `(n, m)`.
    pub entries: DMatrix<Complex64>,
}

impl TranslationMatrix {
    pub fn get(&self, row: MultipoleIndex, col: MultipoleIndex) -> Complex64 {
        self.entries[(row.flat(), col.flat())]
    }
}

/// Translation entries, optionally in the balanced basis. `rows`/`cols`
/// restrict the assembled block (flat indices).
fn translation_block(
    xi0: f64,
    eta0: f64,
    phi0: f64,
    n_max: u32,
    balanced: bool,
    rows: &[MultipoleIndex],
    cols: &[MultipoleIndex],
) -> Result<DMatrix<Complex64>> {
    if !(xi0 > 0.0 && xi0.is_finite()) {
        return Err(Error::Domain(format!("xi0 = {xi0} must be positive")));
    }
    let top = 2 * n_max;
    let harmonics = HarmonicTable::new(top, eta0, phi0)?;
    // ln h_N^M(xi0) for N <= 2 n_max, 0 <= M <= N
    let ln_h: Vec<Vec<f64>> = (0..=top).map(|big| (0..=big).map(|m| ln_h_far(big, m, xi0)).collect()).collect();

    let entry = |row: MultipoleIndex, col: MultipoleIndex| -> Complex64 {
        let (np, mp) = (row.n, row.m);
        let (n, m) = (col.n, col.m);
        let big = n + np;
        let big_m = m - mp;
        let w1 = wigner3j(n, np, big, 0, 0, 0);
        let w2 = wigner3j(n, np, big, m, -mp, mp - m);
        if w1 == 0.0 || w2 == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mut ln_mag = 0.5 * (4.0 * PI * ((2 * n + 1) * (2 * np + 1) * (2 * big + 1)) as f64).ln()
            + w1.abs().ln()
            + w2.abs().ln()
            + ln_h[big as usize][big_m.unsigned_abs() as usize];
        if balanced {
            ln_mag -= ln_balance(n) + ln_balance(np);
        }
        let mut sign = w1.signum() * w2.signum();
        if (n as i64 + m as i64).rem_euclid(2) == 1 {
            sign = -sign;
        }
        let y = harmonics.get(MultipoleIndex { n: big, m: big_m });
        y * (sign * ln_mag.exp())
    };

    let data: Vec<Complex64> = cols
        .par_iter()
        .flat_map_iter(|&col| rows.iter().map(move |&row| entry(row, col)))
        .collect();
    Ok(DMatrix::from_vec(rows.len(), cols.len(), data))
}

/// Translation matrix `U_{n'm', nm}(xi0, eta0, phi0)` for `n, n' <= n_max`.
pub fn translation_matrix(xi0: f64, eta0: f64, phi0: f64, n_max: u32) -> Result<TranslationMatrix> {
    let all: Vec<_> = MultipoleIndex::iter_up_to(n_max).collect();
    let entries = translation_block(xi0, eta0, phi0, n_max, false, &all, &all)?;
    Ok(TranslationMatrix { xi0, eta0, phi0, n_max, entries })
}

/// Two equal disks whose centers are `separation_ratio` radii apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskPairGeometry {
    pub separation_ratio: f64,
}

impl DiskPairGeometry {
    pub fn new(separation_ratio: f64) -> Result<Self> {
        if separation_ratio > 2.0 && separation_ratio.is_finite() {
            Ok(Self { separation_ratio })
        } else {
            Err(Error::InvalidGeometry(format!(
                "r/R = {separation_ratio} must exceed 2 (disjoint disks)"
            )))
        }
    }

    /// Spheroidal radial coordinate of one center seen from the other.
    pub fn xi0(&self) -> f64 {
        let r = self.separation_ratio;
        (r * r - 1.0).sqrt()
    }
}

/// `N = C U+ C U-` in the unscaled basis, full `(n_max+1)^2` dimension.
pub fn reflection_operator(geom: DiskPairGeometry, bc: BoundaryCondition, n_max: u32) -> Result<DMatrix<Complex64>> {
    let c = capacitance_disk(bc, n_max);
    let plus = translation_matrix(geom.xi0(), 0.0, PI / 2.0, n_max)?.entries;
    let minus = translation_matrix(geom.xi0(), 0.0, -PI / 2.0, n_max)?.entries;
    let mut a = plus;
    let mut b = minus;
    for (i, &ci) in c.entries().iter().enumerate() {
        a.row_mut(i).scale_mut(ci);
        b.row_mut(i).scale_mut(ci);
    }
    Ok(a * b)
}

/// Balanced reflection operator restricted to the indices where `C` is nonzero.
/// Its `det(I - N)` equals that of the full operator.
fn reduced_reflection(geom: DiskPairGeometry, bc: BoundaryCondition, n_max: u32) -> Result<DMatrix<Complex64>> {
    let c = capacitance_disk(bc, n_max);
    let cb = c.balanced();
    let support: Vec<MultipoleIndex> =
        MultipoleIndex::iter_up_to(n_max).filter(|idx| cb[idx.flat()] != 0.0).collect();
    let xi0 = geom.xi0();
    let mut a = translation_block(xi0, 0.0, PI / 2.0, n_max, true, &support, &support)?;
    let mut b = translation_block(xi0, 0.0, -PI / 2.0, n_max, true, &support, &support)?;
    for (i, idx) in support.iter().enumerate() {
        let ci = cb[idx.flat()];
        a.row_mut(i).scale_mut(ci);
        b.row_mut(i).scale_mut(ci);
    }
    Ok(a * b)
}

/// Per-sector contributions `-1/2 log det(I - N_bc)` and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoDiskRenyi {
    pub total: f64,
    pub dirichlet: f64,
    pub neumann: f64,
}

/// `-1/2 log det(I - N_bc)` for one boundary condition.
pub fn renyi2_sector(geom: DiskPairGeometry, bc: BoundaryCondition, n_max: u32) -> Result<f64> {
    let n = reduced_reflection(geom, bc, n_max)?;
    let rho = spectral_radius(&n, 200);
    if rho >= 1.0 {
        return Err(Error::NonConvergent(format!(
            "spectral radius {rho:.6} of the reflection operator is not below 1 at r/R = {}",
            geom.separation_ratio
        )));
    }
    let value = -0.5 * real_log_det_i_minus(&n)?;
    if value < 0.0 {
        // all eigenvalues of N are real and in [0, 1), so the sector is nonnegative
        if value < -1e-12 {
            return Err(Error::NonConvergent(format!(
                "negative sector contribution {value:e} at r/R = {}",
                geom.separation_ratio
            )));
        }
        return Ok(0.0);
    }
    Ok(value)
}

/// Rényi information split by boundary condition.
pub fn renyi2_two_disks_by_bc(geom: DiskPairGeometry, n_max: u32) -> Result<TwoDiskRenyi> {
    let dirichlet = renyi2_sector(geom, BoundaryCondition::Dirichlet, n_max)?;
    let neumann = renyi2_sector(geom, BoundaryCondition::Neumann, n_max)?;
    Ok(TwoDiskRenyi { total: dirichlet + neumann, dirichlet, neumann })
}

/// `I2 = -1/2 sum_{D,N} log det(I - N)`.
pub fn renyi2_two_disks(geom: DiskPairGeometry, n_max: u32) -> Result<f64> {
    renyi2_two_disks_by_bc(geom, n_max).map(|r| r.total)
}

/// Leading and subleading large-separation terms,
/// `2/(pi^2 r^2) + (10/(3 pi^2) + 4/pi^4) / r^4` with `r` in units of `R`.
pub fn renyi2_two_disks_asymptotic(geom: DiskPairGeometry) -> f64 {
    let x = 1.0 / geom.separation_ratio;
    let x2 = x * x;
    2.0 / (PI * PI) * x2 + subleading_coefficient() * x2 * x2
}

/// `10/(3 pi^2) + 4/pi^4`.
pub fn subleading_coefficient() -> f64 {
    10.0 / (3.0 * PI * PI) + 4.0 / PI.powi(4)
}

/// Capacitance-only large-distance law `C0_A C0_B / (2 r^{2(d-1)})`.
pub fn renyi2_large_separation(c0_a: f64, c0_b: f64, r: f64, d: u32) -> f64 {
    c0_a * c0_b / (2.0 * r.powi(2 * (d as i32 - 1)))
}

/// One point of a separation sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub r_over_r: f64,
    pub n_max: u32,
    pub result: Result<TwoDiskRenyi>,
}

/// Evaluates every grid point independently (in parallel); output order follows input.
pub fn separation_sweep(grid: &[f64], n_max: u32) -> Vec<SweepPoint> {
    grid.par_iter()
        .map(|&r| SweepPoint {
            r_over_r: r,
            n_max,
            result: DiskPairGeometry::new(r).and_then(|g| renyi2_two_disks_by_bc(g, n_max)),
        })
        .collect()
}
