use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn phaselift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phaselift"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = phaselift(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn generate(dir: &Path, sigma: &str, seed: &str) {
    ok(&[
        "generate", "--dim", "4", "--probes", "120", "--sigma", sigma, "--seed", seed, "--out",
        dir.to_str().unwrap(),
    ]);
}

fn pairs(v: &Value) -> Vec<(f64, f64)> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|p| (p[0].as_f64().unwrap(), p[1].as_f64().unwrap()))
        .collect()
}

/// `min_φ ‖ĥ e^{iφ} − h‖ / ‖h‖`.
fn aligned_error(est: &[(f64, f64)], truth: &[(f64, f64)]) -> f64 {
    // inner = Σ conj(ĥ) h
    let (mut re, mut im, mut nh, mut ne) = (0.0, 0.0, 0.0, 0.0);
    for (&(a, b), &(c, d)) in est.iter().zip(truth) {
        re += a * c + b * d;
        im += a * d - b * c;
        nh += c * c + d * d;
        ne += a * a + b * b;
    }
    let abs = (re * re + im * im).sqrt();
    ((ne + nh - 2.0 * abs).max(0.0) / nh).sqrt()
}

#[test]
fn planted_round_trip_recovers_every_row() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "0", "3");
    let out = dir.path().join("out");
    ok(&[
        "solve",
        dir.path().join("measurements.json").to_str().unwrap(),
        "--method",
        "all",
        "--out",
        out.to_str().unwrap(),
    ]);
    let truth: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("truth.json")).unwrap()).unwrap();
    let est: Value = serde_json::from_str(&fs::read_to_string(out.join("estimates.json")).unwrap()).unwrap();
    let methods = est.as_array().unwrap();
    assert_eq!(methods.len(), 3);
    for m in methods {
        for (row, t) in m["estimates"].as_array().unwrap().iter().zip(truth["rows"].as_array().unwrap()) {
            let e = aligned_error(&pairs(row), &pairs(t));
            assert!(e < 1e-2, "{}: {e}", m["method"]);
        }
    }
}

#[test]
fn admm_five_iterations_give_five_trace_rows() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "0.05", "4");
    let out = ok(&[
        "solve",
        dir.path().join("measurements.json").to_str().unwrap(),
        "--method",
        "admm",
        "--iters",
        "5",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(out.stdout.is_empty());
    let trace = fs::read_to_string(dir.path().join("o/trace.csv")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines[0], "method,iteration,total,row0,row1,row2,row3");
    assert_eq!(lines.len(), 6);
    for (k, line) in lines[1..].iter().enumerate() {
        assert!(line.starts_with(&format!("admm,{},", k + 1)));
    }
}

#[test]
fn same_seed_and_file_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    generate(a.path(), "0.1", "11");
    generate(b.path(), "0.1", "11");
    let read = |d: &Path, f: &str| fs::read(d.join(f)).unwrap();
    assert_eq!(read(a.path(), "measurements.json"), read(b.path(), "measurements.json"));
    let file = a.path().join("measurements.json");
    let run = || ok(&["solve", file.to_str().unwrap(), "--iters", "7"]).stdout;
    assert_eq!(run(), run());

    let conv = |d: &Path| {
        ok(&[
            "convergence", "--seed", "5", "--trials", "1", "--bits", "12000", "--iters", "3", "--out",
            d.to_str().unwrap(),
        ]);
        (read(d, "convergence.csv"), read(d, "convergence.json"))
    };
    assert_eq!(conv(&a.path().join("c")), conv(&b.path().join("c")));
}

#[test]
fn ber_sweep_writes_rows_for_every_curve() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "ber-sweep", "--seed", "2", "--trials", "1", "--bits", "12000", "--snr-grid", "10:12:1", "--method",
        "admm", "--out", dir.path().to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(dir.path().join("ber-sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "method,snr_db,ber,bits,errors,trials,sparse");
    // admm, reference and crosstalk-free at three SNR points
    assert_eq!(lines.len(), 1 + 3 * 3);
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("ber-sweep.json")).unwrap()).unwrap();
    assert!(summary["summary"]["admm"].is_object());
    assert_eq!(summary["crosstalk_free_check"].as_array().unwrap().len(), 3);
}

#[test]
fn flops_report_prints_to_stdout() {
    let out = ok(&["flops", "--method", "admm"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("method,phase,flops\n"));
    assert!(csv.contains("admm,total,"));
    let summary: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["methods"][0]["ops_per_second"].as_array().unwrap().len(), 3);
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(phaselift(&["solve", missing.to_str().unwrap()]).status.code(), Some(3));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"dim\": 2,\n \"lambda\": \"ten\"}").unwrap();
    let out = phaselift(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    // simulation without a seed
    assert_eq!(phaselift(&["convergence", "--trials", "1"]).status.code(), Some(2));

    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"tau": 2.0}"#).unwrap();
    assert_eq!(
        phaselift(&["flops", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(phaselift(&["ber-sweep", "--snr-grid", "3:1:1", "--seed", "1"]).status.code(), Some(2));
}
