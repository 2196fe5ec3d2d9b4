use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn clsk(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clsk"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("CLSK_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const SHORT_MSF: &[&str] =
    &["msf", "--eta-min", "-12", "--eta-max", "-9", "--eta-step", "1", "--horizon", "50", "--transient", "10"];

#[test]
fn msf_is_deterministic_and_writes_manifest() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = clsk(d.path(), SHORT_MSF);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv_a = std::fs::read_to_string(a.path().join("msf.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read_to_string(b.path().join("msf.csv")).unwrap());
    assert_eq!(csv_a.lines().count(), 5);
    let m = json(&a.path().join("run_manifest.json"));
    assert_eq!(m["command"], "msf");
    assert_eq!(m["outputs"]["msf.csv"].as_str().unwrap().len(), 64);
    assert!(m["outputs"]["msf.json"].is_string());
}

#[test]
fn empty_msf_grid_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let o = clsk(d.path(), &["msf", "--eta-min", "1", "--eta-max", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn design_check_accepts_both_examples() {
    for (file, eps) in [("example1.toml", 7.0), ("example2.toml", 3.0)] {
        let d = tempfile::tempdir().unwrap();
        let cfg = configs().join(file);
        let o = clsk(d.path(), &["--config", cfg.to_str().unwrap(), "design-check", "--eta-bar", "-10.5"]);
        assert!(o.status.success(), "{file}: {}", String::from_utf8_lossy(&o.stdout));
        let r = json(&d.path().join("design_report.json"));
        assert_eq!(r["passed"], true);
        assert_eq!(r["epsilon"], eps);
        let m = json(&d.path().join("run_manifest.json"));
        assert_eq!(m["inputs"].as_object().unwrap().len(), 1);
    }
    let d = tempfile::tempdir().unwrap();
    clsk(d.path(), &["design-check", "--eta-bar", "-10.5"]);
    let r = json(&d.path().join("design_report.json"));
    let range = &r["symbols"][0]["spectral"]["epsilon_range"];
    assert!((range[0].as_f64().unwrap() - 5.25).abs() < 1e-9);
    assert!((range[1].as_f64().unwrap() - 17.9246).abs() < 1e-3);
}

#[test]
fn coupling_outside_the_range_fails_the_design_check() {
    let d = tempfile::tempdir().unwrap();
    let text =
        std::fs::read_to_string(configs().join("example1.toml")).unwrap().replace("epsilon = 7.0", "epsilon = 20.0");
    let cfg = d.path().join("weak.toml");
    std::fs::write(&cfg, text).unwrap();
    let o = clsk(d.path(), &["--config", cfg.to_str().unwrap(), "design-check", "--eta-bar", "-10.5"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&d.path().join("design_report.json"))["passed"], false);
}

#[test]
fn missing_or_broken_config_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let o = clsk(d.path(), &["--config", "/nonexistent/net.toml", "design-check", "--eta-bar", "-10.5"]);
    assert_eq!(o.status.code(), Some(2));
    let bad = d.path().join("bad.toml");
    std::fs::write(&bad, "[network]\nnodes = 3\n").unwrap();
    let o = clsk(d.path(), &["--config", bad.to_str().unwrap(), "transmit", "--bits", "01"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn transmit_recovers_bits_and_writes_traces() {
    let d = tempfile::tempdir().unwrap();
    let o = clsk(d.path(), &["--seed", "3", "transmit", "--bits", "01101001", "--sigma", "0.25"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = json(&d.path().join("transmission.json"));
    assert_eq!(t["errors"], 0);
    assert_eq!(t["detected"], serde_json::json!([0, 1, 1, 0, 1, 0, 0, 1]));
    let frames = std::fs::read_to_string(d.path().join("frames.jsonl")).unwrap();
    assert_eq!(frames.lines().count(), 8);
    let channel = std::fs::read_to_string(d.path().join("channel.csv")).unwrap();
    assert!(channel.starts_with("t,node,component,value"));
    // 8 symbols of 200 samples plus the initial state, 8 channel nodes, 3 components.
    assert_eq!(channel.lines().count() - 1, (8 * 200 + 1) * 8 * 3);

    let o = clsk(
        d.path(),
        &[
            "spectrogram",
            "--input",
            d.path().join("channel.csv").to_str().unwrap(),
            "--link",
            "1-2",
            "--window",
            "128",
            "--overlap",
            "64",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c = json(&d.path().join("centroid_test.json"));
    assert_eq!(c["link"], serde_json::json!([1, 2]));
    assert!(c["test"]["test"]["p_value"].as_f64().unwrap() > 0.0);
    assert!(std::fs::read_to_string(d.path().join("spectrogram.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn malformed_bits_and_links_are_usage_errors() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(clsk(d.path(), &["transmit", "--bits", "01x"]).status.code(), Some(2));
    assert_eq!(clsk(d.path(), &["transmit", "--bits", ""]).status.code(), Some(2));
    let csv = d.path().join("t.csv");
    std::fs::write(&csv, "t,node,component,value\n0,1,1,0\n0,1,2,0\n0,1,3,0\n0,2,1,0\n0,2,2,0\n0,2,3,0\n").unwrap();
    let o = clsk(d.path(), &["spectrogram", "--input", csv.to_str().unwrap(), "--link", "1-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ber_resume_runs_only_missing_cells() {
    let d = tempfile::tempdir().unwrap();
    let base = ["ber", "--bits", "100", "--ebn0", "6", "--baseline-bits", "200"];
    let o = clsk(d.path(), &[&base[..], &["--sigma", "0.25"]].concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = std::fs::read_to_string(d.path().join("ber.csv")).unwrap();
    assert_eq!(first.lines().count(), 4);

    let o = clsk(d.path(), &[&base[..], &["--sigma", "0.25,1", "--resume", "--svg"]].concat());
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("3 already done, 1 to run"));
    let second = std::fs::read_to_string(d.path().join("ber.csv")).unwrap();
    assert!(second.starts_with(&first), "resumed file keeps earlier rows");
    assert_eq!(second.lines().count(), 5);
    assert!(d.path().join("ber.svg").exists());

    // A fresh run with the same grid reproduces the counts (wall time aside).
    let e = tempfile::tempdir().unwrap();
    clsk(e.path(), &[&base[..], &["--sigma", "0.25,1"]].concat());
    let strip = |s: &str| s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    let mut a = strip(&second);
    let mut b = strip(&std::fs::read_to_string(e.path().join("ber.csv")).unwrap());
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn diverging_cells_exit_with_status_four() {
    let d = tempfile::tempdir().unwrap();
    let o = clsk(d.path(), &["ber", "--sigma", "0.25", "--epsilon", "100000", "--bits", "100"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    let f = json(&d.path().join("ber_failures.json"));
    assert!(f[0]["error"].as_str().unwrap().contains("diverged"));
}

#[test]
fn baseline_only_sweep_and_sweep_file() {
    let d = tempfile::tempdir().unwrap();
    let o = clsk(d.path(), &["ber", "--scheme", "csk", "--ebn0", "0,10", "--baseline-bits", "200"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = std::fs::read_to_string(d.path().join("ber.csv")).unwrap();
    assert_eq!(rows.lines().filter(|l| l.starts_with("csk,")).count(), 2);
    assert_eq!(rows.lines().count(), 3);

    let sweep = configs().join("sweep_quick.toml");
    let o = clsk(d.path(), &["ber", "--sweep", sweep.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&d.path().join("run_manifest.json"));
    assert_eq!(m["seed"], 7);
    assert_eq!(m["inputs"].as_object().unwrap().len(), 1);
}

#[test]
fn preset_output_round_trips() {
    let o = Command::new(env!("CARGO_BIN_EXE_clsk")).args(["preset", "example2"]).output().unwrap();
    assert!(o.status.success());
    let from_cli = String::from_utf8(o.stdout).unwrap();
    assert_eq!(from_cli, std::fs::read_to_string(configs().join("example2.toml")).unwrap());
}
