//! End-to-end checks of the installed binary: artifact layout, exit codes,
//! range gates, cache behavior, and determinism.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sobonet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sobonet"))
        .args(args)
        .output()
        .expect("binary should launch")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{path:?}: {e}"));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{path:?} is not JSON: {e}"))
}

#[test]
fn catalog_prints_twelve_rows() {
    let out = sobonet(&["catalog"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    assert_eq!(lines.len(), 13, "header plus twelve activations:\n{text}");
    assert!(lines[0].contains("name"));
    assert!(lines.iter().any(|l| l.starts_with("sigmoid")));
}

#[test]
fn catalog_json_is_machine_readable() {
    let out = sobonet(&["catalog", "--json"]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&stdout(&out)).expect("stdout is JSON");
    let rows = doc.as_array().expect("array");
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().any(|r| r["name"] == "tanh" && r["class"] == "exponential"));
}

#[test]
fn synth_writes_network_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("network.json");
    let report = dir.path().join("report.json");
    let cfg = dir.path().join("run.cfg");
    let out = sobonet(&[
        "synth",
        "--activation", "sigmoid",
        "--target", "sin1",
        "--eps", "0.05",
        "--n", "3",
        "--k", "0",
        "--out", net.to_str().unwrap(),
        "--report", report.to_str().unwrap(),
        "--config", cfg.to_str().unwrap(),
        "--save-config",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let rep = read_json(&report);
    assert_eq!(rep["pass"], Value::Bool(true));
    assert_eq!(rep["calibrated"], Value::Bool(true));
    let err = rep["measured_error"].as_f64().unwrap();
    assert!(err <= 0.05, "reported error {err}");
    assert_eq!(rep["network"]["depth"].as_u64(), Some(4));

    let netdoc = read_json(&net);
    assert_eq!(netdoc["activation"], "sigmoid");
    let first_bias = netdoc["layers"][0]["bias"][0].as_str().unwrap();
    assert!(first_bias.starts_with("0x") || first_bias.starts_with("-0x"));

    let cache = std::fs::read_to_string(&cfg).unwrap();
    assert!(cache.contains("ctilde.sigmoid.d1.n3.k0"), "cache: {cache}");
}

#[test]
fn synth_reuses_cache_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let mut nets = Vec::new();
    for run in 0..2 {
        let net = dir.path().join(format!("net{run}.json"));
        let report = dir.path().join(format!("rep{run}.json"));
        let out = sobonet(&[
            "synth",
            "--activation", "sigmoid",
            "--target", "sin1",
            "--eps", "0.1",
            "--out", net.to_str().unwrap(),
            "--report", report.to_str().unwrap(),
            "--config", cfg.to_str().unwrap(),
            "--save-config",
        ]);
        assert_eq!(code(&out), 0, "run {run} stderr: {}", stderr(&out));
        let rep = read_json(&report);
        assert_eq!(rep["calibrated"], Value::Bool(run == 0), "run {run}");
        nets.push(std::fs::read(&net).unwrap());
    }
    assert_eq!(nets[0], nets[1], "same config and seed must give identical artifacts");
}

#[test]
fn synth_relu_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = sobonet(&[
        "synth",
        "--activation", "relu",
        "--target", "sin1",
        "--eps", "0.1",
        "--out", dir.path().join("n.json").to_str().unwrap(),
        "--report", dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "stdout: {}", stdout(&out));
    assert!(
        stderr(&out).contains("second derivative"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn synth_range_gates_exit_two() {
    for (flag, value) in [("--eps", "0.7"), ("--n", "7"), ("--k", "5"), ("--mu", "1.5")] {
        let out = sobonet(&[
            "synth",
            "--activation", "sigmoid",
            "--target", "sin1",
            "--eps", if flag == "--eps" { value } else { "0.1" },
            flag, value,
        ]);
        assert_eq!(code(&out), 2, "{flag} {value}: stderr {}", stderr(&out));
    }
    let out = sobonet(&[
        "synth", "--activation", "sigmoid", "--target", "sin1", "--eps", "0.1", "--d", "2",
    ]);
    assert_eq!(code(&out), 2, "dimension mismatch must be a usage error");
}

#[test]
fn synth_accepts_inline_expressions() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = sobonet(&[
        "synth",
        "--activation", "sigmoid",
        "--target", "sin(2*pi*x)/7",
        "--eps", "0.1",
        "--out", dir.path().join("net.json").to_str().unwrap(),
        "--report", report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let rep = read_json(&report);
    assert!(rep["measured_error"].as_f64().unwrap() <= 0.1);

    let out = sobonet(&[
        "synth", "--activation", "sigmoid", "--target", "tan(x)", "--eps", "0.1",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown name"), "stderr: {}", stderr(&out));
}

#[test]
fn synth_with_spoiled_cache_misses_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "ctilde.sigmoid.d1.n3.k0 = 0.005\n").unwrap();
    let report = dir.path().join("report.json");
    let out = sobonet(&[
        "synth",
        "--activation", "sigmoid",
        "--target", "sin1",
        "--eps", "0.02",
        "--out", dir.path().join("net.json").to_str().unwrap(),
        "--report", report.to_str().unwrap(),
        "--config", cfg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1, "stderr: {}", stderr(&out));
    let rep = read_json(&report);
    assert_eq!(rep["pass"], Value::Bool(false));
    assert!(rep["measured_error"].as_f64().unwrap() > 0.02);
}

#[test]
fn rates_sweep_reports_exponents_and_floors() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("rates.json");
    let out = sobonet(&[
        "rates",
        "--activation", "sigmoid",
        "--target", "sin1",
        "--eps", "0.1,0.05,0.025",
        "--n", "3",
        "--k", "0",
        "--report", report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let rep = read_json(&report);
    assert_eq!(rep["pass"], Value::Bool(true));
    assert_eq!(rep["constant_depth"], Value::Bool(true));
    let theory = rep["theoretical_exponent"].as_f64().unwrap();
    assert!((theory - 1.0 / 3.0).abs() < 1e-12);
    let fitted = rep["fit_connections"]["exponent"].as_f64().unwrap();
    assert!(
        fitted >= 0.0 && fitted <= theory + 0.75,
        "fitted connection exponent {fitted}"
    );
    for row in rep["rows"].as_array().unwrap() {
        assert_eq!(row["floor_below_m"], Value::Bool(true));
        assert!(row["error"].as_f64().unwrap() <= row["eps"].as_f64().unwrap());
    }
    let table = stdout(&out);
    assert!(table.contains("eps") && table.contains("floor"), "table: {table}");
}

#[test]
fn rates_rejects_bad_spacing_and_short_lists() {
    let out = sobonet(&[
        "rates", "--activation", "sigmoid", "--target", "sin1", "--eps", "0.1,0.05,0.03",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("geometrically"), "stderr: {}", stderr(&out));

    let out = sobonet(&[
        "rates", "--activation", "sigmoid", "--target", "sin1", "--eps", "0.1,0.05",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("three"), "stderr: {}", stderr(&out));
}

#[test]
fn codec_roundtrips_a_network_file() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("network.json");
    let out = sobonet(&[
        "synth",
        "--activation", "sigmoid",
        "--target", "sin1",
        "--eps", "0.1",
        "--out", net.to_str().unwrap(),
        "--report", dir.path().join("rep.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let stream = dir.path().join("net.sbn");
    let report = dir.path().join("codec.json");
    let out = sobonet(&[
        "codec",
        "--net", net.to_str().unwrap(),
        "--eps", "0.1",
        "--out", stream.to_str().unwrap(),
        "--report", report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let rep = read_json(&report);
    assert_eq!(rep["pass"], Value::Bool(true));
    assert_eq!(rep["roundtrip_bit_exact"], Value::Bool(true));
    assert_eq!(rep["realization_spot_exact"], Value::Bool(true));
    let bits = rep["stream_bits"].as_u64().unwrap();
    assert!(bits <= rep["budget_bits"].as_u64().unwrap());
    assert_eq!(std::fs::read(&stream).unwrap().len() as u64, bits / 8);
    let perturb = rep["perturbation"].as_f64().unwrap();
    assert!(perturb <= rep["perturbation_cap"].as_f64().unwrap(), "perturbation {perturb}");
}

#[test]
fn codec_synthesizes_when_given_a_target() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("codec.json");
    let out = sobonet(&[
        "codec",
        "--activation", "sigmoid",
        "--target", "sin1",
        "--eps", "0.1",
        "--report", report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let rep = read_json(&report);
    assert_eq!(rep["pass"], Value::Bool(true));
    assert!(rep["source"]["error"].as_f64().unwrap() <= 0.1);
}

#[test]
fn verify_pu_emits_report_rows() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("pu.json");
    let out = sobonet(&[
        "verify-pu",
        "--activation", "sigmoid",
        "--d", "1",
        "--n", "5",
        "--s", "2,4,8,16",
        "--kmax", "2",
        "--report", report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let rep = read_json(&report);
    let rows = rep["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let last_dev = rows[3]["deviation"].as_f64().unwrap();
    assert!(last_dev < 1e-9, "s = 16 deviation {last_dev}");
    let fit = rep["fit"]["exponent"].as_f64().unwrap();
    assert!(fit >= 1.35, "semilog rate {fit}");
}
