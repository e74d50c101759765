use std::path::Path;
use std::process::{Command, Output};

use wpt_aoi::output::{read_sweep_csv, SWEEP_HEADER};

fn wpt_aoi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpt-aoi")).args(args).output().expect("binary runs")
}

fn out_arg(path: &Path) -> String {
    format!("--out={}", path.display())
}

#[test]
fn analytic_json_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    let o = wpt_aoi(&["analytic", "--power-w", "3", "--capacitor-j", "3e-4", &out_arg(&path)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let delta = v["delta"].as_f64().unwrap();
    assert!((delta - 272.8461).abs() < 1e-3);
}

#[test]
fn sweep_b_csv_round_trips_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    for path in [&first, &second] {
        let o = wpt_aoi(&[
            "sweep-b",
            "--power-w",
            "3",
            "--b-values",
            "1e-3,3e-3",
            "--with-simulation",
            "--horizon",
            "200000",
            "--seed",
            "9",
            &out_arg(path),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let bytes = std::fs::read(&first).unwrap();
    assert_eq!(bytes, std::fs::read(&second).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert_eq!(text.lines().next().unwrap(), SWEEP_HEADER.join(","));
    let rows = read_sweep_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].swept_value, 1e-3);
    assert!(rows.iter().all(|r| r.delta_sim.is_some()));
}

#[test]
fn simulate_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let o = wpt_aoi(&[
        "simulate",
        "--power-w",
        "3",
        "--capacitor-j",
        "1e-3",
        "--horizon",
        "5000",
        "--window",
        "full",
        &format!("--trace={}", trace.display()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("slot,harvest_j,energy_j,transmitted,success,age"));
    assert_eq!(lines.count(), 5000);
}

#[test]
fn exit_codes() {
    assert_eq!(wpt_aoi(&["analytic", "--power-w", "3"]).status.code(), Some(2));
    assert_eq!(wpt_aoi(&["analytic", "--power-w=0", "--capacitor-j", "1e-4"]).status.code(), Some(3));
    let o = wpt_aoi(&["simulate", "--power-w", "3", "--capacitor-j", "1e-4", "--lambda", "1e12", "--horizon", "1000"]);
    assert_eq!(o.status.code(), Some(4));
    let o = wpt_aoi(&["analytic", "--power-w", "3", "--capacitor-j", "1e-4", "--out=/nonexistent/dir/x.json"]);
    assert_eq!(o.status.code(), Some(1));
}
