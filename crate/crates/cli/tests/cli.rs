use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn renyi2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renyi2")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Non-comment CSV lines.
fn csv_lines(text: &str) -> Vec<String> {
    text.lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

const SMALL_MC: [&str; 8] =
    ["--n-strata", "8", "--loops-per-stratum", "16", "--placements-per-loop", "16", "--n-points", "128"];

#[test]
fn two_disks_csv_schema_and_values() {
    let o = renyi2(&["two-disks", "--r-over-R", "3:4:0.5", "--n-max", "8", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# renyi2 "));
    assert!(text.contains("# seed: "));
    let lines = csv_lines(&text);
    assert_eq!(lines[0], "r_over_R,I2_total,I2_dirichlet,I2_neumann,n_max,converged");
    assert_eq!(lines.len(), 4);
    let cells: Vec<&str> = lines[1].split(',').collect();
    let expect = renyi_reference(3.0, 8);
    assert_eq!(cells[1].parse::<f64>().unwrap(), expect);
    assert_eq!(cells[4], "8");
    assert_eq!(cells[5], "true");
}

fn renyi_reference(r: f64, n_max: u32) -> f64 {
    let o = renyi2(&["two-disks", "--r-over-R", &r.to_string(), "--n-max", &n_max.to_string()]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    v["results"][0]["I2_total"].as_f64().unwrap()
}

#[test]
fn half_spaces_json() {
    let o = renyi2(&["half-spaces", "--l", "1", "--order", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = &v["results"];
    let a2 = r["A2_coefficient"].as_f64().unwrap();
    assert!((a2 - 0.022).abs() < 0.001);
    let first = r["first_reflection"].as_f64().unwrap();
    assert!((first - 1.0 / (16.0 * std::f64::consts::PI)).abs() < 1e-12);
    assert!(r["second_reflection"].as_f64().unwrap() > 0.0);
    assert_eq!(v["config"]["command"], "half-spaces");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn json_output_round_trips_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let o = renyi2(&["two-disks", "--r-over-R", "2.5,6", "--n-max", "6", "--out", first.to_str().unwrap()]);
    assert!(o.status.success());
    let o = renyi2(&["--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (a, b) = (json_file(&first), json_file(&second));
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["config"]["n_max"], b["config"]["n_max"]);
}

#[test]
fn worldline_runs_reproduce_with_the_same_seed() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("wl.json");
    let mut args = vec!["worldline-mutual", "--r-over-R", "4", "--seed", "9", "--out", first.to_str().unwrap()];
    args.extend(SMALL_MC);
    assert!(renyi2(&args).status.success());
    let second = dir.path().join("wl2.json");
    assert!(renyi2(&["--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()]).status.success());
    let (a, b) = (json_file(&first), json_file(&second));
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["seed"], 9);
    assert!(a["results"][0]["dirichlet"].as_f64().unwrap() > 0.0);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"command": "two-disks", "r_over_r": "5", "n_max": 4}"#).unwrap();
    let o = renyi2(&["--config", cfg.to_str().unwrap(), "two-disks", "--n-max", "5"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["n_max"], 5);
    assert_eq!(v["config"]["r_over_r"], "5");
    assert_eq!(v["results"][0]["n_max"], 5);
}

#[test]
fn plot_data_is_two_columns() {
    let o = renyi2(&["two-disks", "--r-over-R", "3:5:1", "--n-max", "4", "--plot-data", "--format", "csv"]);
    assert!(o.status.success());
    let lines = csv_lines(&stdout(&o));
    assert_eq!(lines[0], "r_over_R,I2_total");
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 2));
    let o = renyi2(&["half-spaces", "--order", "1", "--plot-data"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_statuses() {
    assert_eq!(renyi2(&["two-disks", "--r-over-R", "1:2"]).status.code(), Some(1));
    assert_eq!(renyi2(&["two-disks", "--r-over-R", "1.5"]).status.code(), Some(1));
    assert_eq!(renyi2(&["two-disks", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(renyi2(&[]).status.code(), Some(1));
    assert_eq!(renyi2(&["--help"]).status.code(), Some(0));
    let o = renyi2(&["half-spaces", "--order", "1", "--nodes-per-axis", "8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("quadrature not converged"));
    let mut args = vec!["worldline-mutual", "--r-over-R", "4", "--stderr-cap", "1e-9"];
    args.extend(SMALL_MC);
    let o = renyi2(&args);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
    let o = Command::new(env!("CARGO_BIN_EXE_renyi2"))
        .args(["specfun-table", "--n-max", "1"])
        .env("RENYI_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn acceptance_subset() {
    let o = renyi2(&["acceptance", "--criteria", "1,2,8", "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.lines().filter(|l| l.starts_with("[PASS]")).count(), 3);
    let lines = csv_lines(&stdout(&o));
    assert_eq!(lines[0], "id,name,passed,seconds,detail");
    assert_eq!(lines.len(), 4);
    assert_eq!(renyi2(&["acceptance", "--criteria", "99"]).status.code(), Some(1));
}

#[test]
fn specfun_table_rows() {
    let o = renyi2(&["specfun-table", "--n-max", "2", "--xi", "0:1:0.5", "--format", "csv"]);
    assert!(o.status.success());
    let lines = csv_lines(&stdout(&o));
    assert_eq!(lines[0], "n,m,xi,j,h");
    assert_eq!(lines.len(), 1 + 9 * 3);
}

#[test]
fn inequalities_and_tripartite() {
    let mut args = vec!["inequalities", "--spacing", "3"];
    args.extend(SMALL_MC);
    let o = renyi2(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["results"]["pointwise_violations"], 0);
    let mut args = vec!["worldline-tripartite", "--format", "csv"];
    args.extend(SMALL_MC);
    let o = renyi2(&args);
    assert!(o.status.success());
    let lines = csv_lines(&stdout(&o));
    let neumann: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!(neumann <= 0.0);
}
