use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn timebin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timebin"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn circuits() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../circuits")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn hadamard_on_one_qubit_splits_evenly() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "h.circ", "qubits q0\nH q0\n");
    let out = timebin(&["run", &c, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("o/probabilities.json"));
    let probs = report["probabilities"].as_array().unwrap();
    assert_eq!(probs.len(), 2);
    for (i, p) in probs.iter().enumerate() {
        assert_eq!(p["bin"], i);
        assert!((p["prob"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
    assert!(!dir.path().join("o/events.csv").exists());
}

#[test]
fn parse_errors_name_the_line() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "bad.circ", "qubits a b\nCNOTT a b\n");
    let out = timebin(&["run", &c], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn undersized_frame_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "c.circ", "qubits a b c\nX a\nH c\n");
    let out = timebin(&["run", &c, "--n-bins", "6"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gate 1"), "{err}");
}

#[test]
fn lossy_shor_file_reports_the_loss_product() {
    let dir = TempDir::new().unwrap();
    let c = circuits().join("shor15.circ").display().to_string();
    let out = timebin(&["run", &c, "--loss", "on", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let meta = &json(&dir.path().join("o/probabilities.json"))["metadata"];
    let survival = meta["survival_probability"].as_f64().unwrap();
    let counts = &meta["primitive_counts"];
    let n = |k: &str| counts[k].as_u64().unwrap() as f64;
    assert_eq!(n("couple"), 9.0);
    let db = n("phase_pattern") * 2.0 + (n("pol_rotate") + n("couple")) * 3.5;
    let want = 10f64.powf(-db / 10.0);
    assert!((survival - want).abs() < 1e-12 * want, "{survival} vs {want}");
    assert!((meta["analytic_transmission"].as_f64().unwrap() - want).abs() < 1e-12 * want);
}

#[test]
fn shots_write_events_and_histogram_deterministically() {
    let dir = TempDir::new().unwrap();
    let c = circuits().join("bell.circ").display().to_string();
    for o in ["a", "b"] {
        let out = timebin(&["run", &c, "--shots", "2000", "--seed", "9", "--out", o], dir.path());
        assert_eq!(out.status.code(), Some(0));
    }
    let events = fs::read_to_string(dir.path().join("a/events.csv")).unwrap();
    assert_eq!(events, fs::read_to_string(dir.path().join("b/events.csv")).unwrap());
    assert!(events.starts_with("shot,detected,arrival_ns,bin\n"));
    assert_eq!(events.lines().count(), 2001);
    let hist = fs::read_to_string(dir.path().join("a/histogram.csv")).unwrap();
    assert!(hist.starts_with("bin_start_ns,bin_end_ns,count\n"));
    assert_eq!(hist.lines().count(), 5);
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "run.cfg", "shots = 50\noutput_dir = from_config\n");
    let c = write(&dir, "x.circ", "qubits q0\nX q0\n");
    let out = timebin(&["--config", &cfg, "run", &c], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("from_config/events.csv").exists());
    let out = timebin(&["run", &c, "--config", &cfg, "--shots", "0", "--out", "flagged"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("flagged/probabilities.json").exists());
    assert!(!dir.path().join("flagged/events.csv").exists());
}

#[test]
fn bad_config_is_a_user_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "run.cfg", "shots = 5\nnonsense = 1\n");
    let out = timebin(&["--config", &cfg, "bench", "--n-bins", "32"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn shor_default_instance_reports_peaks_and_factors() {
    let dir = TempDir::new().unwrap();
    let out = timebin(&["shor", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&dir.path().join("o/shor_report.json"));
    let m: Vec<f64> = r["marginal"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    for (y, p) in m.iter().enumerate() {
        let want = if y % 2 == 0 { 0.25 } else { 0.0 };
        assert!((p - want).abs() < 1e-9);
    }
    assert_eq!(r["extraction"]["order"], 4);
    assert_eq!(r["extraction"]["result"]["factors"], serde_json::json!([3, 5]));
    let csv = fs::read_to_string(dir.path().join("o/shor_peaks.csv")).unwrap();
    assert!(csv.starts_with("y,probability,counts,measured_fraction\n"));
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn shor_explicit_samples() {
    let dir = TempDir::new().unwrap();
    let out = timebin(&["shor", "--samples", "0", "--out", "z"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = json(&dir.path().join("z/shor_report.json"));
    assert!(r["extraction"]["order"].is_null());
    assert!(r["samples"][0]["outcome"].as_str().unwrap().contains("inherent"));
    let out = timebin(&["shor", "--samples", "2", "--out", "t"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("t/shor_report.json"))["extraction"]["order"], 4);
}

#[test]
fn shor_unsupported_instance_and_user_encoding() {
    let dir = TempDir::new().unwrap();
    let out = timebin(&["shor", "--modulus", "21", "--base", "2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported"));

    let enc = write(&dir, "seven.enc", "# 7^x mod 15\n1 0\n7 1\n4 2\n13 3\n");
    let out = timebin(&["shor", "--base", "7", "--encoding", &enc, "--out", "s"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&dir.path().join("s/shor_report.json"))["extraction"]["order"], 4);
}

#[test]
fn characterize_outputs() {
    let dir = TempDir::new().unwrap();
    let out = timebin(&["characterize", "cnot", "--out", "c"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("c/cnot_truth_table.csv")).unwrap();
    let perm = [0, 1, 3, 2];
    for (i, line) in table.lines().skip(1).enumerate() {
        let cells: Vec<f64> = line.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        for (o, p) in cells.iter().enumerate() {
            let want = if perm[i] == o { 1.0 } else { 0.0 };
            assert!((p - want).abs() < 1e-9, "row {i}: {line}");
        }
    }

    let out = timebin(&["characterize", "rz-sweep", "--steps", "9", "--out", "c"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let sweep = fs::read_to_string(dir.path().join("c/rz_sweep.csv")).unwrap();
    assert!(sweep.starts_with("angle,sx,sy,sz\n"));
    for line in sweep.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - v[0].cos()).abs() < 1e-9 && (v[2] - v[0].sin()).abs() < 1e-9, "{line}");
    }

    let out = timebin(&["characterize", "ry-sweep", "--steps", "5", "--out", "c"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let sweep = fs::read_to_string(dir.path().join("c/ry_sweep.csv")).unwrap();
    let first: Vec<f64> = sweep.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[3] - 1.0).abs() < 1e-12);

    let out = timebin(&["characterize", "ry-sweep", "--steps", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_limits() {
    let dir = TempDir::new().unwrap();
    let out = timebin(&["bench", "--n-bins", "32"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["n_bins"], 32);
    assert_eq!(report["state_bytes"], 32 * 2 * 16);
    assert_eq!(timebin(&["bench", "--n-bins", "131072"], dir.path()).status.code(), Some(4));
    assert_eq!(timebin(&["bench", "--n-bins", "48"], dir.path()).status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(timebin(&["frobnicate"], dir.path()).status.code(), Some(2));
    let help = timebin(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("flag always wins"));
}
