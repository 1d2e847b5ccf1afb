use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xbar-margin"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn bundled_profile_path() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("profiles/22nm.json")
        .display()
        .to_string()
}

#[test]
fn margin_text() {
    let p = bundled_profile_path();
    let o = run(&["margin", "--profile", &p, "--ron", "20e3", "--k", "10", "--n", "512", "--vread", "0.2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("k'        8.673710"), "{s}");
    assert!(s.contains("k'/k      0.867371"), "{s}");
    assert!(s.contains("I_on") && s.contains("I_off"));
}

#[test]
fn margin_json() {
    let o = run(&["margin", "--ron", "20e3", "--n", "512", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["margin_normalized"].as_f64().unwrap() - 0.867371045604064).abs() < 1e-12);
    assert_eq!(v["n_cells"], 512);
    assert_eq!(v["engine"], "lumped");
}

#[test]
fn margin_oracle_engine_close_to_lumped() {
    let o = run(&["margin", "--ron", "20e3", "--n", "512", "--engine", "oracle", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["margin_normalized"].as_f64().unwrap() - 0.867371).abs() < 1e-4);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["margin", "--ron", "20e3", "--n", "512", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["margin", "--n", "512"]).status.code(), Some(2));
    assert_eq!(run(&["margin", "--ron", "twenty", "--n", "512"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_values_exit_1() {
    let o = run(&["margin", "--ron=-5", "--n", "512"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
    let o = run(&["margin", "--ron", "20e3", "--n", "512", "--vread", "0.9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("0.9"), "{}", stderr(&o));
}

#[test]
fn profile_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let o = run(&["margin", "--profile", missing.to_str().unwrap(), "--ron", "1e4", "--n", "8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.json"));

    let extra = dir.path().join("extra.json");
    fs::write(
        &extra,
        r#"{"node":"x","r_unit_ohm":2.5,"r_transistor_ohm":1700,"colour":"red",
            "leakage":[{"v_read_v":0.2,"i_leak_a":4e-11}]}"#,
    )
    .unwrap();
    let o = run(&["margin", "--profile", extra.to_str().unwrap(), "--ron", "1e4", "--n", "8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn optimal_range_text_and_json() {
    let p = bundled_profile_path();
    let o = run(&["optimal-range", "--profile", &p, "--k", "10", "--n", "1024", "--threshold", "0.8"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("[1.78"), "{s}");
    assert!(s.contains("1.17") || s.contains("1.16"), "{s}");

    let o = run(&["optimal-range", "--k", "100", "--n", "1024", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["interval"].is_null());
    assert!(v["peak_margin"].as_f64().unwrap() < 0.8);
}

#[test]
fn validate_default_grid() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("v.csv");
    let p = bundled_profile_path();
    let o = run(&["validate", "--profile", &p, "--grid", "paper", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 101);

    let o = run(&["validate", "--points", "3", "--tolerance", "1e-9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn sweep_rows_per_size_and_resistance() {
    let o = run(&["sweep", "--points", "7", "--n", "256,1024", "--k", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert!(lines.next().unwrap().starts_with("curve,engine,n_cells,r_on_ohm"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 14);
    assert!(rows[0].starts_with("N=256,lumped,256,10000.0,"));
    assert!(rows[13].starts_with("N=1024,lumped,1024,100000000.0,"));
}

#[test]
fn sweep_and_ablate_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("s.svg");
    let o = run(&[
        "sweep",
        "--axis",
        "cells",
        "--ron",
        "1e4,5e4,1e5",
        "--csv",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 1 + 3 * 7);
    assert_eq!(fs::read_to_string(&svg).unwrap().matches("<polyline").count(), 3);

    let svg = dir.path().join("a.svg");
    let o = run(&["ablate", "--n", "1024", "--points", "20", "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&svg).unwrap();
    for label in ["baseline", "\u{2212}R_T", "\u{2212}r", "\u{2212}I_Tleak"] {
        assert!(text.contains(&format!(">{label}</text>")), "{label}");
    }
    assert_eq!(text.matches("<polyline").count(), 4);
}

#[test]
fn compensate_reports_power_cost() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let o = run(&["compensate", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("0.4 V: max improvement 0.083"), "{s}");
    assert!(s.contains("0.6 V: max improvement 0.107"), "{s}");
    assert!(s.contains("x4.00") && s.contains("x9.00"));
}

#[test]
fn figures_from_bundled_profile() {
    let dir = tempfile::tempdir().unwrap();
    for fig in ["fig3", "fig4", "fig5", "fig6"] {
        let o = run(&[fig, "--out", dir.path().to_str().unwrap(), "--points", "30"]);
        assert_eq!(o.status.code(), Some(0), "{fig}: {}", stderr(&o));
    }
    for name in [
        "fig3a.csv", "fig3a.svg", "fig3b.csv", "fig3b.svg", "fig3c.csv", "fig3c.svg", "fig4a.csv",
        "fig4a.svg", "fig4b.csv", "fig4b.svg", "fig5.csv", "fig5.svg", "fig6.csv", "fig6a.svg",
        "fig6b.svg",
    ] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let gains = fs::read_to_string(dir.path().join("fig6b.svg")).unwrap();
    assert_eq!(gains.matches("<polyline").count(), 2);
}
