//! End-to-end runs of the four subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn kelab(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["kelab"];
    argv.extend_from_slice(args);
    let code = kelab::run(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let path = dir.join("run.json");
    fs::write(&path, json).unwrap();
    path
}

fn run_with(json: &str, command: &[&str]) -> (tempfile::TempDir, Run) {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), json);
    let out = tmp.path().join("out");
    let mut args = command.to_vec();
    args.extend_from_slice(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let r = kelab(&args);
    (tmp, r)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Header and rows of a CSV file with no quoted fields.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

fn spread(xs: &[f64]) -> f64 {
    xs.iter().map(|x| (x - xs[0]).abs()).fold(0.0, f64::max)
}

fn drift_of(manifest: &Value, name: &str) -> f64 {
    let inv = manifest["invariants"].as_array().unwrap().iter().find(|i| i["name"] == name).unwrap();
    inv["drift"].as_str().unwrap().parse().unwrap()
}

const KE3D_EXAMPLE: &str = r#"{
    "system": "ke3d_I",
    "params": {"mu": 1.0},
    "functions": {"f": {"kind": "zero"}},
    "initial": {"t": 0.0, "q": [1.0, 1.5707963267948966, 0.0], "v": [0.0, 1.0, 0.0]},
    "integrator": {"t_end": 5.0}
}"#;

#[test]
fn list_shows_the_registry() {
    let r = kelab(&["list"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let line = r.stdout.lines().find(|l| l.starts_with("ke3d_I")).unwrap();
    assert!(line.contains("mu"), "{line}");
    assert!(line.contains("invariants={E, J, I+, I-"), "{line}");
}

#[test]
fn list_as_json() {
    let r = kelab(&["list", "--json"]);
    assert_eq!(r.code, 0);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let entries = v.as_array().unwrap();
    assert_eq!(entries.len(), kepler_ermakov::prelude::SYSTEM_NAMES.len());
    let ke = entries.iter().find(|e| e["name"] == "ke3d_I").unwrap();
    assert_eq!(ke["params"], serde_json::json!(["mu"]));
    let invs: Vec<&str> = ke["invariants"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    for inv in ["E", "J", "I+", "I-"] {
        assert!(invs.contains(&inv), "{invs:?}");
    }
}

#[test]
fn list_with_unknown_filter_is_empty() {
    let r = kelab(&["list", "no-such-system", "--json"]);
    assert_eq!(r.code, 0);
    assert_eq!(serde_json::from_str::<Value>(&r.stdout).unwrap(), serde_json::json!([]));
    assert_eq!(kelab(&["list", "no-such-system"]).code, 0);
}

#[test]
fn simulate_ke3d_example() {
    let (tmp, r) = run_with(KE3D_EXAMPLE, &["simulate"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let out = tmp.path().join("out");
    let (header, rows) = read_csv(&out.join("ke3d_I.csv"));
    assert_eq!(&header[..4], ["t", "R", "phi", "theta"]);
    let t = column(&header, &rows, "t");
    assert_eq!(*t.last().unwrap(), 5.0);
    let (j, jl) = (column(&header, &rows, "J"), column(&header, &rows, "J_local"));
    assert!((j[0] - 1.0).abs() <= 1e-14 && (jl[0] - 1.0).abs() <= 1e-14);
    // The local form holds the stated tolerance. The combined form cancels
    // terms of size R⁴ ~ e^{4t} and sits at its rounding floor.
    assert!(spread(&jl) <= 1e-8, "J_local spread {:e}", spread(&jl));
    assert!(spread(&j) <= 1e-7, "J spread {:e}", spread(&j));

    let man = read_json(&out.join("ke3d_I.manifest.json"));
    assert_eq!(man["status"], "ok");
    assert_eq!(man["system"], "ke3d_I");
    assert_eq!(man["csv"], "ke3d_I.csv");
    assert_eq!(man["rows"].as_u64().unwrap() as usize, rows.len());
    // The recorded drift is the one recomputed from the CSV column.
    let recomputed = spread(&jl) / jl[0].abs().max(1.0);
    assert!((drift_of(&man, "J_local") - recomputed).abs() <= 1e-15);
}

#[test]
fn simulate_solves_the_energy_constraint() {
    let cfg = r#"{"system": "fr_cosmo_uvw", "constraint": {"solve": "u", "energy": 0.0}}"#;
    let (tmp, r) = run_with(cfg, &["simulate"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let man = read_json(&tmp.path().join("out/fr_cosmo_uvw.manifest.json"));
    let c = &man["constraint"];
    assert_eq!(c["coordinate"], "u");
    let solved: f64 = c["solved_velocity"].as_str().unwrap().parse().unwrap();
    assert!(solved.is_finite());
    let residual: f64 = c["energy_residual"].as_str().unwrap().parse().unwrap();
    assert!(residual.abs() <= 1e-12, "{residual:e}");
    let (header, rows) = read_csv(&tmp.path().join("out/fr_cosmo_uvw.csv"));
    assert_eq!(column(&header, &rows, "u_dot")[0], solved);
}

#[test]
fn simulate_from_the_origin_is_rejected() {
    let cfg = r#"{"system": "ke3d_I", "initial": {"q": [0.0, 1.0, 0.5], "v": [0.1, 0.0, 0.2]}}"#;
    let (_tmp, r) = run_with(cfg, &["simulate"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("singular"), "{}", r.stderr);
}

#[test]
fn check_involution_on_f_r_cone() {
    let (tmp, r) = run_with(r#"{"system": "fr_cosmo_uvw"}"#, &["check", "involution"]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    let report = read_json(&tmp.path().join("out/check_involution_fr_cosmo_uvw.json"));
    assert_eq!(report["failed"], 0);
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    for e in entries {
        assert!(e["value"].as_str().unwrap().parse::<f64>().unwrap() <= 1e-6);
    }
    assert!(tmp.path().join("out/involution_fr_cosmo_uvw.csv").exists());
}

#[test]
fn check_symmetry_on_power_law_f_r() {
    let cfg = r#"{"system": "fr_cosmo_raw", "params": {"n": 0.875}}"#;
    let (tmp, r) = run_with(cfg, &["check", "symmetry"]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    let report = read_json(&tmp.path().join("out/check_symmetry_fr_cosmo_raw.json"));
    assert_eq!(report["failed"], 0);
}

#[test]
fn off_the_exponent_only_time_translation_is_offered() {
    let (on, off) = (
        run_with(r#"{"system": "fr_cosmo_raw", "params": {"n": 0.875}}"#, &["check", "symmetry"]),
        run_with(r#"{"system": "fr_cosmo_raw", "params": {"n": 0.6}}"#, &["check", "symmetry"]),
    );
    assert_eq!(off.1.code, 0, "{}", off.1.stdout);
    let count = |tmp: &tempfile::TempDir| {
        read_json(&tmp.path().join("out/check_symmetry_fr_cosmo_raw.json"))["entries"].as_array().unwrap().len()
    };
    assert!(count(&off.0) < count(&on.0));
    assert!(!off.1.stdout.contains("FAIL"));
}

#[test]
fn check_oracle_on_all_systems() {
    let (tmp, r) = run_with("{}", &["check", "oracle", "--system", "all"]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    let report = read_json(&tmp.path().join("out/check_oracle_all.json"));
    assert_eq!(report["failed"], 0);
    assert!(report["entries"].as_array().unwrap().len() >= 12);
}

#[test]
fn sweep_over_oscillator_strength() {
    let cfg = r#"{"system": "ke2d", "sweep": {"axes": [{"param": "mu", "values": [0.0, 0.5, 1.0]}]}}"#;
    let (tmp, r) = run_with(cfg, &["sweep"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, rows) = read_csv(&tmp.path().join("out/sweep_ke2d.csv"));
    assert_eq!(rows.len(), 3);
    let mu = column(&header, &rows, "mu");
    let j = column(&header, &rows, "drift_J");
    let jl = column(&header, &rows, "drift_J_local");
    let e = column(&header, &rows, "drift_E");
    for k in 0..3 {
        assert_eq!(rows[k][header.iter().position(|h| h == "status").unwrap()], "ok");
        assert!(jl[k] <= 1e-8 && e[k] <= 1e-8, "mu = {}: J_local {:e}, E {:e}", mu[k], jl[k], e[k]);
        if mu[k] <= 0.5 {
            assert!(j[k] <= 1e-8, "mu = {}: J {:e}", mu[k], j[k]);
        }
    }
    let man = read_json(&tmp.path().join("out/sweep_ke2d.manifest.json"));
    assert_eq!(man["succeeded"], 3);
}

#[test]
fn sweep_recovers_the_f_r_exponent() {
    let cfg = r#"{"sweep": {"kind": "fr_exponent", "axes": [{"param": "mu", "values": [0.0, 1.0, 2.0]}]}}"#;
    let (tmp, r) = run_with(cfg, &["sweep"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, rows) = read_csv(&tmp.path().join("out/sweep_fr_exponent.csv"));
    for n in column(&header, &rows, "n") {
        assert!((n - 0.875).abs() <= 1e-12);
    }
    for res in column(&header, &rows, "residual") {
        assert!(res <= 1e-10);
    }
}

#[test]
fn empty_grid_is_a_config_error() {
    let cfg = r#"{"system": "ke2d", "sweep": {"axes": [{"param": "mu", "values": []}]}}"#;
    let (_tmp, r) = run_with(cfg, &["sweep"]);
    assert_eq!(r.code, 1);
}

#[test]
fn config_errors_exit_with_one() {
    assert_eq!(run_with(r#"{"system": "nope"}"#, &["simulate"]).1.code, 1);
    assert_eq!(run_with(r#"{"system": "ke3d_I", "bogus": 1}"#, &["simulate"]).1.code, 1);
    assert_eq!(run_with(r#"{"system": "ke3d_I", "params": {"nu": 1}}"#, &["simulate"]).1.code, 1);
    assert_eq!(kelab(&["frobnicate"]).code, 1);
    assert_eq!(kelab(&["--help"]).code, 0);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_kelab");
    let ok = Command::new(bin).args(["list", "ke3d"]).output().unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("ke3d_I"));
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"system": "ke3d_I", "initial": {"q": [0.0, 1.0, 0.5], "v": [0.0, 0.0, 0.0]}}"#);
    let bad = Command::new(bin).args(["simulate", "--config", cfg.to_str().unwrap()]).current_dir(tmp.path()).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
