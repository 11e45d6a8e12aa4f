//! Resolved run configuration: JSON file first, command-line flags on top.

use std::path::PathBuf;

use renyi_core::{QuadratureSpec, SamplingParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    TwoDisks,
    HalfSpaces,
    DiskHalfspace,
    WorldlineMutual,
    WorldlineTripartite,
    Inequalities,
    SpecfunTable,
    Acceptance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    /// Inferred from the file extension when absent, JSON otherwise.
    pub format: Option<Format>,
    pub plot_data: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { path: None, format: None, plot_data: false }
    }
}

impl OutputConfig {
    pub fn resolved_format(&self) -> Format {
        self.format.unwrap_or_else(|| match self.path.as_ref().and_then(|p| p.extension()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        })
    }
}

/// Every parameter of every command; unused ones are carried along unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandKind>,
    /// Center distance over disk radius: a number, a list `a,b,c` or a grid `start:stop:step`.
    pub r_over_r: String,
    pub n_max: u32,
    /// Half-space separation, or disk-to-edge distance.
    pub l: f64,
    /// Reflection order for half-spaces, 1 or 2.
    pub order: u32,
    pub disk_radius: f64,
    /// Center spacing of the three collinear unit disks (tripartite, inequalities).
    pub spacing: f64,
    /// Spheroidal coordinate grid for the special-function table.
    pub xi: String,
    pub quadrature: QuadratureSpec,
    pub sampling: SamplingParams,
    /// Scale worldline results to I2 units using the multipole value at r/R = 5.
    pub calibrate: bool,
    /// Acceptance criteria to run; all when empty.
    pub criteria: Vec<u8>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            r_over_r: "3:20:0.5".into(),
            n_max: 20,
            l: 1.0,
            order: 2,
            disk_radius: 1.0,
            spacing: 3.0,
            xi: "0:5:0.5".into(),
            quadrature: QuadratureSpec::default(),
            sampling: SamplingParams::default(),
            calibrate: false,
            criteria: Vec::new(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads a config file. A previous JSON output is accepted too; its embedded
    /// `config` object is used.
    pub fn from_file(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {} is not JSON: {e}", path.display())))?;
        let value = match value.get("config") {
            Some(inner) if value.get("results").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Parses `x`, `a,b,c` or `start:stop:step`. The stop value is included when the
/// grid lands within half a step of it.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("bad grid '{spec}': {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [single] => single.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err(bad("need step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step - 0.5).ceil().max(0.0) as usize;
            if count > 1_000_000 {
                return Err(bad("more than a million points"));
            }
            (0..=count).map(|k| start + k as f64 * step).collect()
        }
        _ => return Err(bad("expected a number, a comma list or start:stop:step")),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(values)
}
