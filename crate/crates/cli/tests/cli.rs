use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn mondeq(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mondeq"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

const GENUINE: &str = "interp.family = simple\ninterp.alpha = 1\nansatz.kind = polytrope\nansatz.k = 1\nansatz.l = 0\nsolve.y0 = 1\noutput.dir = out\n";

#[test]
fn solve_genuine_mond_polytrope() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "run.cfg", GENUINE);
    let out = mondeq(&["solve", &cfg], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&tmp.path().join("out"));
    assert_eq!(s["classification"], "compact");
    assert_eq!(s["S"], "divergent(log)");
    let tf = s["tully_fisher_ratio"].as_f64().unwrap();
    assert!((tf - 1.0).abs() < 1e-3);
    let profile = fs::read_to_string(tmp.path().join("out/profile.csv")).unwrap();
    let mut lines = profile.lines();
    assert_eq!(lines.next().unwrap(), "r,y,m,rho,uprime,U,vcirc");
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[1], 1.0);
    assert_eq!(first[6], 0.0);
}

#[test]
fn solve_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "run.cfg", GENUINE);
    assert!(mondeq(&["solve", &cfg], tmp.path()).status.success());
    let a = fs::read(tmp.path().join("out/summary.json")).unwrap();
    let pa = fs::read(tmp.path().join("out/profile.csv")).unwrap();
    assert!(mondeq(&["solve", &cfg], tmp.path()).status.success());
    assert_eq!(a, fs::read(tmp.path().join("out/summary.json")).unwrap());
    assert_eq!(pa, fs::read(tmp.path().join("out/profile.csv")).unwrap());
}

#[test]
fn newtonian_maxwellian_has_divergent_mass() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "run.cfg",
        "interp.family = newtonian\nansatz.kind = maxwellian\noutput.dir = out\n",
    );
    let out = mondeq(&["solve", &cfg], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&tmp.path().join("out"));
    assert_eq!(s["classification"], "extended; mass divergent");
    assert_eq!(s["phase"], "extended-divergent");
}

#[test]
fn e0_at_infinity_with_physical_units_and_resample() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "run.cfg",
        "interp.family = simple\ninterp.alpha = 0.5\nansatz.kind = polytrope\nansatz.k = 1\nansatz.l = 0\n\
         ansatz.cutoff = e0-at-infinity\noutput.dir = out\noutput.resample = 11\noutput.mass_unit_kg = 2e40\n",
    );
    let out = mondeq(&["solve", &cfg], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&tmp.path().join("out"));
    assert!(s["E0"].as_f64().unwrap() < 0.0);
    assert!(s["S"].is_number());
    assert!(s["physical"]["R_m"].as_f64().unwrap() > 0.0);
    let resampled = fs::read_to_string(tmp.path().join("out/profile_resampled.csv")).unwrap();
    assert_eq!(resampled.lines().count(), 12);
}

#[test]
fn missing_key_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "run.cfg",
        "interp.family = simple\ninterp.alpha = 1\nansatz.kind = polytrope\nansatz.l = 0\nsolve.rel_tol = -1\n",
    );
    let out = mondeq(&["solve", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ansatz.k"), "{err}");
    assert!(err.contains("solve.rel_tol"), "{err}");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn genuine_mond_rejects_e0_at_infinity() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "run.cfg", &format!("{GENUINE}ansatz.cutoff = e0-at-infinity\n"));
    let out = mondeq(&["solve", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("genuine MOND"));
}

#[test]
fn numerical_failure_exit_code() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "run.cfg",
        "interp.family = simple\ninterp.alpha = 1\nansatz.kind = maxwellian\nsolve.max_steps = 5\noutput.dir = out\n",
    );
    let out = mondeq(&["solve", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

fn sweep_rows(dir: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(dir.join("sweep_summary.csv")).unwrap();
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sweep_phase_diagram() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "base.cfg", GENUINE);
    let axes = write(tmp.path(), "axes.txt", "alpha = 0, 1\nk = 1, 3, 4\n");
    let out = mondeq(&["sweep", &cfg, "--axes", &axes], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = sweep_rows(&tmp.path().join("out"));
    assert_eq!(rows[0][..5], ["run", "alpha", "k", "status", "classification"]);
    assert_eq!(rows.len(), 7);
    let phase_col = rows[0].iter().position(|c| c == "phase").unwrap();
    for row in &rows[1..] {
        let (alpha, k) = (row[1].as_str(), row[2].as_str());
        let expected = if alpha == "0" && k == "4" { "extended-finite-y\u{221e}" } else { "compact" };
        assert_eq!(row[phase_col], expected, "alpha={alpha} k={k}");
        assert!(tmp.path().join(format!("out/run_{:04}/summary.json", row[0].parse::<usize>().unwrap())).exists());
    }
}

#[test]
fn empty_axes_reproduce_a_single_solve() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "base.cfg", GENUINE);
    let axes = write(tmp.path(), "axes.txt", "");
    assert!(mondeq(&["sweep", &cfg, "--axes", &axes], tmp.path()).status.success());
    let swept = fs::read(tmp.path().join("out/run_0000/summary.json")).unwrap();
    let single_cfg = write(tmp.path(), "single.cfg", &GENUINE.replace("dir = out", "dir = single"));
    assert!(mondeq(&["solve", &single_cfg], tmp.path()).status.success());
    assert_eq!(swept, fs::read(tmp.path().join("single/summary.json")).unwrap());
}

#[test]
fn sweep_over_central_value_is_compact() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "base.cfg", GENUINE);
    let axes = write(tmp.path(), "axes.txt", "y0 = 0.1, 1, 10\n");
    assert!(mondeq(&["sweep", &cfg, "--axes", &axes], tmp.path()).status.success());
    let rows = sweep_rows(&tmp.path().join("out"));
    assert_eq!(rows.len(), 4);
    assert!(rows[1..].iter().all(|r| r[2] == "ok" && r[3] == "compact"));
}

#[test]
fn failing_row_does_not_abort_the_sweep() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "base.cfg", GENUINE);
    let axes = write(tmp.path(), "axes.txt", "k = 1, -2, 2\n");
    let out = mondeq(&["sweep", &cfg, "--axes", &axes], tmp.path());
    assert!(out.status.success());
    let rows = sweep_rows(&tmp.path().join("out"));
    assert_eq!(rows[1][2], "ok");
    assert_eq!(rows[2][2], "failed");
    assert!(rows[2].last().unwrap().contains("ansatz.l") || rows[2].join(",").contains("-1"));
    assert_eq!(rows[3][2], "ok");
}

#[test]
fn sweep_cap_is_enforced() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "base.cfg", &format!("{GENUINE}sweep.max_runs = 2\n"));
    let axes = write(tmp.path(), "axes.txt", "k = 1, 2, 3\n");
    let out = mondeq(&["sweep", &cfg, "--axes", &axes], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max_runs"));
}

#[test]
fn validate_passes_on_a_fresh_build() {
    let tmp = TempDir::new().unwrap();
    let out = mondeq(&["validate", "--report", "report.json"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.iter().filter(|c| c["name"] == "lane_emden").count(), 1);
    assert_eq!(checks.iter().filter(|c| c["name"].as_str().unwrap().starts_with("c_l_consistency")).count(), 8);
    assert_eq!(checks.iter().filter(|c| c["name"].as_str().unwrap().starts_with("poisson_residual")).count(), 3);
    for c in checks {
        for key in ["name", "value", "threshold", "passed"] {
            assert!(c.get(key).is_some(), "{key} missing in {c}");
        }
    }
}

#[test]
fn validate_reports_a_corrupted_mu_table() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "mu.txt", "0.1 0.09\n1 0.6\n2 0.2\n10 0.95\n");
    let cfg = write(
        tmp.path(),
        "run.cfg",
        "interp.family = table\ninterp.table_path = mu.txt\ninterp.alpha = 1\nansatz.kind = polytrope\nansatz.k = 1\nansatz.l = 0\n",
    );
    let out = mondeq(&["validate", "--config", &cfg, "--report", "r.json"], tmp.path());
    assert_eq!(out.status.code(), Some(4));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let failing: Vec<_> = stdout.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failing.len(), 1, "{stdout}");
    assert!(failing[0].contains("zeta_round_trip[table:"), "{}", failing[0]);
}
