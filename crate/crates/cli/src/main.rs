//! `renyi2`: Rényi-2 mutual information of a free scalar between planar
//! regions, from the command line.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CommandKind, Format, RunConfig};
use error::CliError;

/// Environment variable that sets the worker thread count.
const THREADS_ENV: &str = "RENYI_THREADS";

#[derive(Parser, Debug)]
#[command(name = "renyi2", version, about = "Order-2 Rényi mutual information between planar regions")]
struct Cli {
    /// JSON config file (or a previous JSON output); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Emit only (x, y) pairs for plotting.
    #[arg(long, global = true)]
    plot_data: bool,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Args, Debug, Default)]
struct QuadArgs {
    #[arg(long)]
    alpha_cutoff: Option<f64>,
    #[arg(long)]
    nodes_per_axis: Option<usize>,
    /// Allowed relative change under node doubling.
    #[arg(long)]
    quad_tolerance: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct McArgs {
    #[arg(long)]
    loops_per_stratum: Option<usize>,
    #[arg(long)]
    placements_per_loop: Option<usize>,
    /// Skeleton points per loop (power of two, >= 8).
    #[arg(long)]
    n_points: Option<usize>,
    #[arg(long)]
    n_strata: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fail with exit status 3 if stderr/mean exceeds this.
    #[arg(long)]
    stderr_cap: Option<f64>,
    #[arg(long, requires = "s_max")]
    s_min: Option<f64>,
    #[arg(long, requires = "s_min")]
    s_max: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Two equal disks, multipole route, over a separation grid.
    TwoDisks {
        /// Center distance over radius: `x`, `a,b,c` or `start:stop:step`.
        #[arg(long = "r-over-R")]
        r_over_r: Option<String>,
        #[arg(long)]
        n_max: Option<u32>,
    },
    /// Two half-spaces, per unit edge length.
    HalfSpaces {
        #[arg(long)]
        l: Option<f64>,
        /// 1 = single reflection, 2 = through the second reflection.
        #[arg(long)]
        order: Option<u32>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Small disk facing a half-space.
    DiskHalfspace {
        #[arg(long = "R")]
        disk_radius: Option<f64>,
        #[arg(long)]
        l: Option<f64>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Worldline estimate for two unit disks.
    WorldlineMutual {
        #[arg(long = "r-over-R")]
        r_over_r: Option<String>,
        /// Convert to I2 units via the multipole value at r/R = 5.
        #[arg(long)]
        calibrate: bool,
        /// Truncation order of the calibration reference.
        #[arg(long)]
        n_max: Option<u32>,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Worldline tripartite estimate for three collinear unit disks.
    WorldlineTripartite {
        #[arg(long)]
        spacing: Option<f64>,
        #[command(flatten)]
        mc: McArgs,
    },
    /// 0 <= I2(A,B,C) <= I2(A,B) for three collinear unit disks.
    Inequalities {
        #[arg(long)]
        spacing: Option<f64>,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Radial spheroidal functions j and h for n <= n_max.
    SpecfunTable {
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long)]
        xi: Option<String>,
    },
    /// Runs the acceptance criteria.
    Acceptance {
        /// Comma-separated criterion ids; all when absent.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply_quad(cfg: &mut RunConfig, q: QuadArgs) {
    set(&mut cfg.quadrature.alpha_cutoff, q.alpha_cutoff);
    set(&mut cfg.quadrature.nodes_per_axis, q.nodes_per_axis);
    set(&mut cfg.quadrature.tolerance, q.quad_tolerance);
}

fn apply_mc(cfg: &mut RunConfig, m: McArgs) {
    let s = &mut cfg.sampling;
    set(&mut s.loops_per_stratum, m.loops_per_stratum);
    set(&mut s.placements_per_loop, m.placements_per_loop);
    set(&mut s.n_points, m.n_points);
    set(&mut s.n_strata, m.n_strata);
    set(&mut s.seed, m.seed);
    if m.stderr_cap.is_some() {
        s.stderr_cap = m.stderr_cap;
    }
    if let (Some(lo), Some(hi)) = (m.s_min, m.s_max) {
        s.s_range = Some((lo, hi));
    }
}

/// File values first, then every flag that was given.
fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if cli.out.is_some() {
        cfg.output.path = cli.out;
    }
    if cli.format.is_some() {
        cfg.output.format = cli.format;
    }
    cfg.output.plot_data |= cli.plot_data;
    let kind = match cli.command {
        None => None,
        Some(Cmd::TwoDisks { r_over_r, n_max }) => {
            set(&mut cfg.r_over_r, r_over_r);
            set(&mut cfg.n_max, n_max);
            Some(CommandKind::TwoDisks)
        }
        Some(Cmd::HalfSpaces { l, order, quad }) => {
            set(&mut cfg.l, l);
            set(&mut cfg.order, order);
            apply_quad(&mut cfg, quad);
            Some(CommandKind::HalfSpaces)
        }
        Some(Cmd::DiskHalfspace { disk_radius, l, quad }) => {
            set(&mut cfg.disk_radius, disk_radius);
            set(&mut cfg.l, l);
            apply_quad(&mut cfg, quad);
            Some(CommandKind::DiskHalfspace)
        }
        Some(Cmd::WorldlineMutual { r_over_r, calibrate, n_max, mc }) => {
            set(&mut cfg.r_over_r, r_over_r);
            set(&mut cfg.n_max, n_max);
            cfg.calibrate |= calibrate;
            apply_mc(&mut cfg, mc);
            Some(CommandKind::WorldlineMutual)
        }
        Some(Cmd::WorldlineTripartite { spacing, mc }) => {
            set(&mut cfg.spacing, spacing);
            apply_mc(&mut cfg, mc);
            Some(CommandKind::WorldlineTripartite)
        }
        Some(Cmd::Inequalities { spacing, mc }) => {
            set(&mut cfg.spacing, spacing);
            apply_mc(&mut cfg, mc);
            Some(CommandKind::Inequalities)
        }
        Some(Cmd::SpecfunTable { n_max, xi }) => {
            set(&mut cfg.n_max, n_max);
            set(&mut cfg.xi, xi);
            Some(CommandKind::SpecfunTable)
        }
        Some(Cmd::Acceptance { criteria }) => {
            if !criteria.is_empty() {
                cfg.criteria = criteria;
            }
            Some(CommandKind::Acceptance)
        }
    };
    if kind.is_some() {
        cfg.command = kind;
    }
    if cfg.command.is_none() {
        return Err(CliError::Usage("no command given on the command line or in the config file".into()));
    }
    Ok(cfg)
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = init_threads().and_then(|_| resolve(cli)).and_then(|cfg| commands::run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("renyi2: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
