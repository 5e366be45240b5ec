// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qdl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdl"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run qdl")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn missing_config_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = qdl(&["train", "--config", "absent.json", "--out", "run"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("config not found"));
    assert!(!dir.path().join("run").exists());
}

#[test]
fn malformed_config_exits_2() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"T_ns": 10, "unknown_field": 1}"#).unwrap();
    assert_eq!(code(&qdl(&["train", "--config", "bad.json", "--out", "run"], dir.path())), 2);
    fs::write(dir.path().join("neg.json"), r#"{"T_ns": -10}"#).unwrap();
    assert_eq!(code(&qdl(&["train", "--config", "neg.json", "--out", "run"], dir.path())), 2);
    assert_eq!(code(&qdl(&["train", "--mode", "sideways", "--out", "run"], dir.path())), 2);
}

#[test]
fn zero_epochs_writes_initial_artifacts() {
    let dir = TempDir::new().unwrap();
    let o = qdl(&["train", "--epochs", "0", "--out", "run"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let run = dir.path().join("run");
    for f in ["schedule.json", "epochs.csv", "traces.csv", "run-manifest.json"] {
        assert!(run.join(f).is_file(), "{f}");
    }
    assert_eq!(csv_rows(&run.join("epochs.csv")), 1);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("run-manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["epochs"], 0);
    assert_eq!(manifest["config"]["K_init_rad_per_ns"], 2.5e-3);
    assert_eq!(manifest["seed"], 0);
}

#[test]
fn default_rl_run_logs_every_epoch_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    for out in ["a", "b"] {
        let o = qdl(&["train", "--mode", "rl", "--epochs", "3", "--seed", "5", "--out", out], dir.path());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(csv_rows(&a.join("epochs.csv")), 4);
    for f in ["epochs.csv", "traces.csv", "schedule.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let rms: Vec<f64> = fs::read_to_string(a.join("epochs.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(rms[3] < rms[0]);
}

#[test]
fn backprop_and_circuit_modes_run() {
    let dir = TempDir::new().unwrap();
    let o = qdl(&["train", "--mode", "backprop", "--epochs", "2", "--out", "bp"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(csv_rows(&dir.path().join("bp/epochs.csv")), 3);

    fs::write(
        dir.path().join("circ.json"),
        r#"{"mode": "circuit", "backend": {"shots": 512, "p_ro": 0.01}, "seed": 3}"#,
    )
    .unwrap();
    for out in ["c1", "c2"] {
        let o = qdl(&["train", "--config", "circ.json", "--epochs", "2", "--out", out], dir.path());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let read = |p: &str| fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("c1/epochs.csv"), read("c2/epochs.csv"));
    let schedule = fs::read_to_string(dir.path().join("c1/schedule.json")).unwrap();
    assert!(schedule.contains("\"piecewise\""));
}

#[test]
fn staging_round_trips_and_rejects_no_op() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&qdl(&["train", "--epochs", "0", "--out", "run"], dir.path())), 0);
    let o = qdl(&["stage", "--in", "run/schedule.json", "--out", "s3.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s3: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("s3.json")).unwrap()).unwrap();
    assert_eq!(s3["num_qubits"], 3);
    assert_eq!(s3["coefficients"]["coupling"].as_array().unwrap().len(), 3);

    assert_eq!(code(&qdl(&["stage", "--in", "s3.json", "--out", "s5.json", "--qubits", "5"], dir.path())), 0);
    assert_eq!(code(&qdl(&["stage", "--in", "s5.json", "--out", "s5b.json", "--qubits", "5"], dir.path())), 2);
    assert_eq!(code(&qdl(&["stage", "--in", "s5.json", "--out", "s7.json", "--qubits", "7"], dir.path())), 2);
    assert_eq!(code(&qdl(&["stage", "--in", "none.json", "--out", "x.json"], dir.path())), 2);
}

#[test]
fn oracle_prints_concurrence() {
    let dir = TempDir::new().unwrap();
    let value = |amps: &str| -> f64 {
        let o = qdl(&["oracle", "--amplitudes", amps], dir.path());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        stdout(&o).split('\t').nth(1).unwrap().trim().parse().unwrap()
    };
    assert!((value("0.7071067811865476,0,0,0.7071067811865476") - 1.0).abs() < 1e-12);
    assert!(value("0.5,0.5,0.5,0.5").abs() < 1e-12);
    assert!((value("0.6,0,0,0.8") - 0.96).abs() < 1e-12);
    assert_eq!(code(&qdl(&["oracle", "--amplitudes", "1,0"], dir.path())), 2);
    assert_eq!(code(&qdl(&["oracle"], dir.path())), 2);
}

#[test]
fn eval_writes_sweep_report() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&qdl(&["train", "--epochs", "0", "--out", "run"], dir.path())), 0);
    fs::write(
        dir.path().join("states.json"),
        r#"[{"label": "bell", "amplitudes": [0.7071067811865476, 0, 0, 0.7071067811865476]},
            {"label": "mixed", "density": [[0.5, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0.5]]}]"#,
    )
    .unwrap();
    let o = qdl(
        &["eval", "--schedule", "run/schedule.json", "--states", "states.json", "--out", "report.csv"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(csv_rows(&dir.path().join("report.csv")), 2 + 21);
    assert!(stdout(&o).contains("spearman"));
}

#[test]
fn export_samples_schedule() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&qdl(&["train", "--epochs", "0", "--out", "run"], dir.path())), 0);
    let o = qdl(&["export", "--schedule", "run/schedule.json", "--out", "t.csv", "--samples", "10"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(text.starts_with("epoch,t,K_0,K_1,eps_0,eps_1,zeta_01"));
    assert_eq!(text.lines().count(), 12);
}
