use std::path::Path;
use std::process::{Command, Output};

fn qspectral(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qspectral"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

const HEAT: &str = r#"{"q": 0.5, "k_min": -12, "k_max": 40, "problem": {"kind": "heat", "m": 1.0}}"#;

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn minimal_heat_config_gets_defaults() {
    let d = tempfile::tempdir().unwrap();
    write_config(d.path(), "heat.json", HEAT);
    let out = qspectral(d.path(), &["solve-heat", "--config", "heat.json", "--out", "run"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&d.path().join("run"));
    let cfg = &r["config"];
    assert_eq!(cfg["mode"], "full-line");
    assert_eq!(cfg["time_nodes"], 65);
    assert_eq!(cfg["panels"], 8);
    assert_eq!(cfg["T"], 1.0);
    assert_eq!(cfg["precision_digits"], 60);
    assert_eq!(cfg["initial"]["family"], "gaussian-bump");
    let csv = std::fs::read_to_string(d.path().join("run/solution.csv")).unwrap();
    assert!(csv.starts_with("t,k,sign,x,re_u,im_u\n"));
    assert_eq!(csv.lines().count(), 1 + 65 * 53 * 2);
}

#[test]
fn q_out_of_range_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    write_config(d.path(), "c.json", r#"{"q": 1.2, "k_min": -12, "k_max": 40, "problem": {"kind": "heat", "m": 1.0}}"#);
    let out = qspectral(d.path(), &["solve-heat", "--config", "c.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0 < q < 1"));
}

#[test]
fn overdamped_wave_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    write_config(d.path(), "c.json", r#"{"q": 0.5, "k_min": -12, "k_max": 40, "problem": {"kind": "wave", "b": 3, "m": 2}}"#);
    let out = qspectral(d.path(), &["solve-wave", "--config", "c.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("wave requires b^2 < 4m"), "{err}");
}

#[test]
fn solve_then_verify_passes_with_damping_check() {
    let d = tempfile::tempdir().unwrap();
    write_config(d.path(), "heat.json", HEAT);
    let out = qspectral(d.path(), &["solve-heat", "--config", "heat.json", "--out", "solve"]);
    assert_eq!(out.status.code(), Some(0));
    let out = qspectral(
        d.path(),
        &["verify", "--config", "heat.json", "--out", "check", "--trajectory", "solve/solution.csv"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&d.path().join("check"));
    assert_eq!(r["passed"], true);
    let checks: Vec<&serde_json::Value> = r["result"]["reports"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|rep| rep["checks"].as_array().unwrap())
        .collect();
    let damping = checks.iter().find(|c| c["name"] == "damping e^{-tm}").expect("damping check");
    assert_eq!(damping["pass"], true);
    assert!(checks.iter().all(|c| c["tolerance"].is_number() && c["measured"].is_number()));
}

#[test]
fn corrupted_trajectory_fails_verification() {
    let d = tempfile::tempdir().unwrap();
    write_config(d.path(), "heat.json", HEAT);
    assert_eq!(qspectral(d.path(), &["solve-heat", "--config", "heat.json", "--out", "solve"]).status.code(), Some(0));
    let text = std::fs::read_to_string(d.path().join("solve/solution.csv")).unwrap();
    let mut lines = text.lines();
    let mut bad = format!("{}\n", lines.next().unwrap());
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let re: f64 = f[4].parse().unwrap();
        bad.push_str(&format!("{},{},{},{},{:.16e},{}\n", f[0], f[1], f[2], f[3], re * 1.01, f[5]));
    }
    std::fs::write(d.path().join("bad.csv"), bad).unwrap();
    let out = qspectral(d.path(), &["verify", "--config", "heat.json", "--out", "check", "--trajectory", "bad.csv"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(report(&d.path().join("check"))["passed"], false);
}

#[test]
fn kernel_table_rows_carry_certified_errors() {
    let d = tempfile::tempdir().unwrap();
    write_config(d.path(), "heat.json", HEAT);
    let out = qspectral(d.path(), &["kernel-table", "--config", "heat.json", "--out", "k"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.path().join("k/kernel.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("m,argument,re,im,certified_error"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), (80 - (-24) + 1) as usize);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!(f.len(), 5);
        let e: f64 = f[4].parse().unwrap();
        assert!(e.is_finite() && e > 0.0, "{r}");
    }
}

#[test]
fn identical_configs_give_identical_csv() {
    let d = tempfile::tempdir().unwrap();
    write_config(
        d.path(),
        "w.json",
        r#"{"q": 0.5, "k_min": -12, "k_max": 40, "problem": {"kind": "wave", "b": 1, "m": 2},
            "velocity": {"family": "polynomial-window", "degree": 3, "radius": 2}, "time_nodes": 17}"#,
    );
    for dir in ["a", "b"] {
        assert_eq!(qspectral(d.path(), &["solve-wave", "--config", "w.json", "--out", dir]).status.code(), Some(0));
    }
    let a = std::fs::read(d.path().join("a/solution.csv")).unwrap();
    let b = std::fs::read(d.path().join("b/solution.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn half_line_solver_reports_calibration_failure() {
    let d = tempfile::tempdir().unwrap();
    write_config(d.path(), "heat.json", HEAT);
    let out = qspectral(d.path(), &["solve-heat", "--config", "heat.json", "--mode", "half"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("calibration"));
    let out = qspectral(d.path(), &["transform", "--config", "heat.json", "--mode", "half", "--out", "t"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&d.path().join("t"))["result"]["calibration_failure"].is_string());
}

#[test]
fn data_csv_input_is_accepted() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("phi.csv"), "k,sign,re,im\n0,+,1.0,0\n0,-,1.0,0\n1,+,0.5,0\n1,-,0.5,0\n").unwrap();
    write_config(
        d.path(),
        "c.json",
        r#"{"q": 0.5, "k_min": -12, "k_max": 40, "initial": {"family": "csv", "path": "phi.csv"}}"#,
    );
    let out = qspectral(d.path(), &["transform", "--config", "c.json", "--out", "t"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    write_config(
        d.path(),
        "missing.json",
        r#"{"q": 0.5, "k_min": -12, "k_max": 40, "initial": {"family": "csv", "path": "nope.csv"}}"#,
    );
    assert_eq!(qspectral(d.path(), &["transform", "--config", "missing.json"]).status.code(), Some(2));
}
