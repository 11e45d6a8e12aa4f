//! CSV and JSON emission with provenance.
//!
//! CSV files start with `#` comment lines (tool version, seed, resolved config as
//! JSON) followed by a fixed header. Floats are written with 17 significant
//! digits in CSV; JSON uses the shortest representation that round-trips.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Float(x) => x.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Float)
    }
}

/// Rows with a fixed column set.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    Value::Object(self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect())
                })
                .collect(),
        )
    }

    /// Two-column projection for plotting.
    pub fn xy(&self, x: &str, y: &str) -> Table {
        let ix = self.columns.iter().position(|c| *c == x).expect("x column");
        let iy = self.columns.iter().position(|c| *c == y).expect("y column");
        let mut t = Table::new(&[self.columns[ix], self.columns[iy]]);
        for r in &self.rows {
            t.push(vec![r[ix].clone(), r[iy].clone()]);
        }
        t
    }
}

/// What a command produced: a table for CSV plus a JSON document
/// (the table rows unless the command has richer structure).
pub struct Report {
    pub table: Table,
    pub json: Option<Value>,
    /// `(x, y)` columns offered by `--plot-data`.
    pub plot: Option<(&'static str, &'static str)>,
}

#[derive(Serialize)]
struct Record<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    config: &'a RunConfig,
    results: Value,
}

pub fn emit(cfg: &RunConfig, report: Report) -> Result<(), CliError> {
    let (table, json_body) = if cfg.output.plot_data {
        let (x, y) = report
            .plot
            .ok_or_else(|| CliError::Usage("--plot-data is only available for two-disks and worldline-mutual".into()))?;
        let t = report.table.xy(x, y);
        let pairs = Value::Array(t.rows.iter().map(|r| json!([r[0].json(), r[1].json()])).collect());
        (t, pairs)
    } else {
        let body = report.json.unwrap_or_else(|| report.table.json_rows());
        (report.table, body)
    };
    let bytes = match cfg.output.resolved_format() {
        Format::Json => {
            let rec = Record {
                tool: "renyi2",
                version: renyi_core::VERSION,
                seed: cfg.sampling.seed,
                config: cfg,
                results: json_body,
            };
            let mut s = serde_json::to_string_pretty(&rec).map_err(|e| CliError::Output(e.to_string()))?;
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => csv_bytes(cfg, &table)?,
    };
    match &cfg.output.path {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::Output(e.to_string())),
    }
}

fn csv_bytes(cfg: &RunConfig, table: &Table) -> Result<Vec<u8>, CliError> {
    let config = serde_json::to_string(cfg).map_err(|e| CliError::Output(e.to_string()))?;
    let mut out = format!(
        "# renyi2 {}\n# seed: {}\n# config: {config}\n",
        renyi_core::VERSION,
        cfg.sampling.seed
    )
    .into_bytes();
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(&table.columns).map_err(err)?;
    for r in &table.rows {
        w.write_record(r.iter().map(Cell::csv)).map_err(err)?;
    }
    out.extend(w.into_inner().map_err(|e| CliError::Output(e.to_string()))?);
    Ok(out)
}
