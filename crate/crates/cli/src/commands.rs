//! One function per subcommand; each returns a [`Report`] and, for partial
//! failures, the error to exit with after the output has been written.

use renyi_core::acceptance::{run_criterion, CRITERIA};
use renyi_core::disk_multipole::{renyi2_sector, separation_sweep};
use renyi_core::halfspace::{
    disk_halfspace, first_reflection_halfspaces_by_bc, second_reflection_halfspaces_by_bc,
};
use renyi_core::specfun::{h_fn, j_fn, MultipoleIndex};
use renyi_core::worldline::{estimate_mutual, estimate_tripartite, inequality_suite, two_disk_regions};
use renyi_core::{
    BoundaryCondition, DiskHalfSpaceGeometry, DiskPairGeometry, Error, HalfSpacePairGeometry, PlanarRegion,
};
use serde_json::json;

use crate::config::{parse_grid, CommandKind, RunConfig};
use crate::error::CliError;
use crate::output::{emit, Cell, Report, Table};

/// Separation used to calibrate worldline results.
const CALIBRATION_R: f64 = 5.0;

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let kind = cfg.command.ok_or_else(|| CliError::Usage("no command".into()))?;
    let (report, deferred) = match kind {
        CommandKind::TwoDisks => two_disks(cfg)?,
        CommandKind::HalfSpaces => (half_spaces(cfg)?, None),
        CommandKind::DiskHalfspace => (disk_half_space(cfg)?, None),
        CommandKind::WorldlineMutual => (worldline_mutual(cfg)?, None),
        CommandKind::WorldlineTripartite => (worldline_tripartite(cfg)?, None),
        CommandKind::Inequalities => inequalities(cfg)?,
        CommandKind::SpecfunTable => (specfun_table(cfg)?, None),
        CommandKind::Acceptance => acceptance(cfg)?,
    };
    emit(cfg, report)?;
    deferred.map_or(Ok(()), Err)
}

fn two_disks(cfg: &RunConfig) -> Result<(Report, Option<CliError>), CliError> {
    let grid = parse_grid(&cfg.r_over_r)?;
    for &r in &grid {
        DiskPairGeometry::new(r)?;
    }
    let mut table = Table::new(&["r_over_R", "I2_total", "I2_dirichlet", "I2_neumann", "n_max", "converged"]);
    let mut first_error = None;
    for p in separation_sweep(&grid, cfg.n_max) {
        let (vals, ok) = match p.result {
            Ok(v) => ([v.total, v.dirichlet, v.neumann].map(Cell::Float), true),
            Err(e) => {
                eprintln!("renyi2: r/R = {}: {e}", p.r_over_r);
                first_error.get_or_insert(CliError::Core(e));
                ([Cell::Missing, Cell::Missing, Cell::Missing], false)
            }
        };
        let [t, d, n] = vals;
        table.push(vec![p.r_over_r.into(), t, d, n, Cell::Int(p.n_max as i64), Cell::Bool(ok)]);
    }
    Ok((Report { table, json: None, plot: Some(("r_over_R", "I2_total")) }, first_error))
}

fn half_spaces(cfg: &RunConfig) -> Result<Report, CliError> {
    if !(1..=2).contains(&cfg.order) {
        return Err(CliError::Usage(format!("order must be 1 or 2, got {}", cfg.order)));
    }
    let geom = HalfSpacePairGeometry::new(cfg.l)?;
    let first = first_reflection_halfspaces_by_bc(geom, &cfg.quadrature)?;
    let second = if cfg.order == 2 { Some(second_reflection_halfspaces_by_bc(geom, &cfg.quadrature)?) } else { None };
    let a2 = cfg.l * (first.total + second.map_or(0.0, |s| s.total));
    let mut table = Table::new(&[
        "l",
        "order",
        "first_reflection",
        "first_dirichlet",
        "first_neumann",
        "second_reflection",
        "second_dirichlet",
        "second_neumann",
        "A2_coefficient",
    ]);
    table.push(vec![
        cfg.l.into(),
        Cell::Int(cfg.order as i64),
        first.total.into(),
        first.dirichlet.into(),
        first.neumann.into(),
        second.map(|s| s.total).into(),
        second.map(|s| s.dirichlet).into(),
        second.map(|s| s.neumann).into(),
        a2.into(),
    ]);
    let json = json!({
        "l": cfg.l,
        "order": cfg.order,
        "first_reflection": first.total,
        "first_reflection_by_bc": first,
        "second_reflection": second.map(|s| s.total),
        "second_reflection_by_bc": second,
        "A2_coefficient": a2,
    });
    Ok(Report { table, json: Some(json), plot: None })
}

fn disk_half_space(cfg: &RunConfig) -> Result<Report, CliError> {
    let r = disk_halfspace(DiskHalfSpaceGeometry::new(cfg.disk_radius, cfg.l)?, &cfg.quadrature)?;
    if let Some(w) = &r.warning {
        eprintln!("renyi2: warning: {w}");
    }
    let mut table = Table::new(&["disk_radius", "l", "I2", "double_integral", "truncation_error"]);
    table.push(vec![cfg.disk_radius.into(), cfg.l.into(), r.i2.into(), r.double_integral.into(), r.truncation_error.into()]);
    let json = json!({
        "disk_radius": cfg.disk_radius,
        "l": cfg.l,
        "I2": r.i2,
        "double_integral": r.double_integral,
        "truncation_error": r.truncation_error,
        "warning": r.warning,
    });
    Ok(Report { table, json: Some(json), plot: None })
}

fn worldline_mutual(cfg: &RunConfig) -> Result<Report, CliError> {
    let grid = parse_grid(&cfg.r_over_r)?;
    let pairs: Vec<_> = grid.iter().map(|&r| two_disk_regions(r)).collect::<Result<_, _>>()?;
    let factor = if cfg.calibrate {
        let (a, b) = two_disk_regions(CALIBRATION_R)?;
        let raw = estimate_mutual(&a, &b, &cfg.sampling)?.dirichlet;
        let reference = renyi2_sector(DiskPairGeometry::new(CALIBRATION_R)?, BoundaryCondition::Dirichlet, cfg.n_max)?;
        Some(renyi_core::worldline::calibration_factor(reference, &raw)?)
    } else {
        None
    };
    let mut table = Table::new(&[
        "r_over_R",
        "dirichlet",
        "dirichlet_stderr",
        "neumann",
        "neumann_stderr",
        "tail_estimate",
        "I2_dirichlet_calibrated",
        "n_samples",
        "seed",
    ]);
    for (&r, (a, b)) in grid.iter().zip(&pairs) {
        let e = estimate_mutual(a, b, &cfg.sampling)?;
        table.push(vec![
            r.into(),
            e.dirichlet.mean.into(),
            e.dirichlet.stderr.into(),
            e.neumann.mean.into(),
            e.neumann.stderr.into(),
            e.tail_estimate.into(),
            factor.map(|f| f * e.dirichlet.mean).into(),
            Cell::Int(e.dirichlet.n_samples as i64),
            Cell::Int(e.dirichlet.seed as i64),
        ]);
    }
    Ok(Report { table, json: None, plot: Some(("r_over_R", "dirichlet")) })
}

fn collinear_disks(spacing: f64) -> Result<[PlanarRegion; 3], Error> {
    Ok([
        PlanarRegion::disk([-spacing, 0.0], 1.0)?,
        PlanarRegion::disk([0.0, 0.0], 1.0)?,
        PlanarRegion::disk([spacing, 0.0], 1.0)?,
    ])
}

fn worldline_tripartite(cfg: &RunConfig) -> Result<Report, CliError> {
    let [a, b, c] = collinear_disks(cfg.spacing)?;
    let e = estimate_tripartite(&a, &b, &c, &cfg.sampling)?;
    let mut table = Table::new(&["spacing", "dirichlet", "dirichlet_stderr", "neumann", "neumann_stderr", "n_samples", "seed"]);
    table.push(vec![
        cfg.spacing.into(),
        e.dirichlet.mean.into(),
        e.dirichlet.stderr.into(),
        e.neumann.mean.into(),
        e.neumann.stderr.into(),
        Cell::Int(e.dirichlet.n_samples as i64),
        Cell::Int(e.dirichlet.seed as i64),
    ]);
    Ok(Report { table, json: Some(serde_json::to_value(&e).expect("serializable")), plot: None })
}

fn inequalities(cfg: &RunConfig) -> Result<(Report, Option<CliError>), CliError> {
    let [a, b, c] = collinear_disks(cfg.spacing)?;
    let rep = inequality_suite(&a, &b, &c, &cfg.sampling)?;
    let mut table = Table::new(&["check", "passed", "margin"]);
    table.push(vec![
        Cell::Text("pointwise dominance".into()),
        Cell::Bool(rep.pointwise_violations == 0),
        Cell::Int(-(rep.pointwise_violations as i64)),
    ]);
    for c in &rep.checks {
        table.push(vec![Cell::Text(c.name.clone()), Cell::Bool(c.passed), c.margin.into()]);
    }
    let failed = table.rows.iter().filter(|r| r[1] == Cell::Bool(false)).count();
    let json = serde_json::to_value(&rep).expect("serializable");
    Ok((Report { table, json: Some(json), plot: None }, (failed > 0).then_some(CliError::AcceptanceFailed(failed))))
}

fn specfun_table(cfg: &RunConfig) -> Result<Report, CliError> {
    let xi = parse_grid(&cfg.xi)?;
    let mut table = Table::new(&["n", "m", "xi", "j", "h"]);
    for idx in MultipoleIndex::iter_up_to(cfg.n_max) {
        for &x in &xi {
            table.push(vec![
                Cell::Int(idx.n as i64),
                Cell::Int(idx.m as i64),
                x.into(),
                j_fn(idx, x)?.into(),
                h_fn(idx, x)?.into(),
            ]);
        }
    }
    Ok(Report { table, json: None, plot: None })
}

fn acceptance(cfg: &RunConfig) -> Result<(Report, Option<CliError>), CliError> {
    let ids: Vec<u8> = if cfg.criteria.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { cfg.criteria.clone() };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(CliError::Usage(format!("no acceptance criterion {bad}")));
    }
    let mut table = Table::new(&["id", "name", "passed", "seconds", "detail"]);
    let mut failed = 0;
    for id in ids {
        let o = run_criterion(id);
        eprintln!("{o}");
        failed += !o.passed as usize;
        table.push(vec![Cell::Int(o.id as i64), Cell::Text(o.name), Cell::Bool(o.passed), o.seconds.into(), Cell::Text(o.detail)]);
    }
    Ok((Report { table, json: None, plot: None }, (failed > 0).then_some(CliError::AcceptanceFailed(failed))))
}
