use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/h2_sto6g.fcidump");
const FCI: f64 = -1.1459217373175763;

fn chemsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chemsim")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> Value {
    let out = chemsim(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn same_seed_gives_identical_bytes() {
    for cmd in [
        vec!["qpe", "--input", FIXTURE, "--seed", "11"],
        vec!["mitigate", "--input", FIXTURE, "--seed", "11", "--mode", "shots", "--shots", "2000"],
        vec!["vqe", "--input", FIXTURE, "--seed", "11", "--set", "optimizer=spsa", "--set", "max_iters=50"],
    ] {
        let a = chemsim(&cmd);
        let b = chemsim(&cmd);
        assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{cmd:?}");
    }
}

#[test]
fn different_seeds_differ_for_sampled_runs() {
    let a = run_ok(&["qpe", "--input", FIXTURE, "--seed", "1", "--set", "initial=hf"]);
    let b = run_ok(&["qpe", "--input", FIXTURE, "--seed", "2", "--set", "initial=hf"]);
    assert_ne!(a["result"]["qpe"]["counts"], b["result"]["qpe"]["counts"]);
}

#[test]
fn mapping_and_tapering_h2() {
    let v = run_ok(&["map", "--input", FIXTURE, "--seed", "0"]);
    assert_eq!(v["result"]["n_qubits"], 4);
    let dir = tempfile::tempdir().unwrap();
    let ham = dir.path().join("h.json");
    let v = run_ok(&["map", "--input", FIXTURE, "--seed", "0", "--taper", "--hamiltonian-output", ham.to_str().unwrap()]);
    assert_eq!(v["result"]["n_qubits"], 1);
    assert_eq!(v["result"]["symmetry_generators"].as_array().unwrap().len(), 3);
    // The written Pauli sum is a valid input in its own right.
    let s = run_ok(&["spectrum", "--input", ham.to_str().unwrap(), "--seed", "0"]);
    assert!((s["result"]["ground_energy"].as_f64().unwrap() - FCI).abs() < 1e-10);
}

#[test]
fn every_encoding_gives_the_same_ground_energy() {
    for enc in ["jw", "parity", "bk", "parity_reduced"] {
        let v = run_ok(&["spectrum", "--input", FIXTURE, "--seed", "0", "--encoding", enc]);
        let e = v["result"]["ground_energy"].as_f64().unwrap();
        assert!((e - FCI).abs() < 1e-10, "{enc}: {e}");
    }
}

#[test]
fn vqe_reaches_the_exact_ground_energy() {
    let v = run_ok(&["vqe", "--input", FIXTURE, "--seed", "5"]);
    let e = v["result"]["energy"].as_f64().unwrap();
    assert!((e - FCI).abs() < 1e-6, "{e}");
}

#[test]
fn trotter_series_has_expected_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("series.csv");
    let v = run_ok(&["evolve", "--input", FIXTURE, "--seed", "0", "--series", csv_path.to_str().unwrap()]);
    let series = v["result"]["series"].as_array().unwrap();
    for (s, expected) in series.iter().zip([-1.0, -2.0]) {
        let slope = s["fitted_slope"].as_f64().unwrap();
        assert!((slope - expected).abs() < 0.1, "order {}: {slope}", s["order"]);
    }
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers, vec!["method", "order", "steps", "time", "operator_error", "state_error", "bound"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    for r in &rows {
        let err: f64 = r[4].parse().unwrap();
        let bound: f64 = r[6].parse().unwrap();
        assert!(err <= bound, "{r:?}");
    }
}

#[test]
fn replay_reproduces_output_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let out = chemsim(&[
        "mitigate", "--input", FIXTURE, "--seed", "9", "--mode", "shots", "--shots", "3000", "--output",
        first.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = chemsim(&["--replay", first.to_str().unwrap(), "--output", second.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn tampered_result_is_not_replayed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    assert!(chemsim(&["spectrum", "--input", FIXTURE, "--seed", "1", "-o", path.to_str().unwrap()]).status.success());
    let mut v = read_json(&path);
    v["config"]["levels"] = Value::String("2".into());
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let out = chemsim(&["--replay", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, format!("# H2\ninput = {FIXTURE}\nseed = 4\nlevels = 3\n")).unwrap();
    let v = run_ok(&["spectrum", "--config", cfg.to_str().unwrap(), "--set", "levels=2"]);
    assert_eq!(v["result"]["eigenvalues"].as_array().unwrap().len(), 2);
    assert_eq!(v["seed"], 4);
    assert_eq!(v["config"]["levels"], "2");
}

#[test]
fn missing_input_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.json");
    let out = chemsim(&["spectrum", "--input", "/nonexistent/h2.fcidump", "-o", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read input file"));
    assert!(!out_path.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn failure_after_staging_leaves_no_partial_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.json");
    // The method is only checked once the Hamiltonian is loaded.
    let out = chemsim(&["evolve", "--input", FIXTURE, "--set", "method=magic", "-o", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn bad_configuration_exits_2() {
    let cases: &[&[&str]] = &[
        &["spectrum", "--input", FIXTURE, "--set", "shots=5"],
        &["spectrum", "--input", FIXTURE, "--encoding", "morse"],
        &["vqe", "--input", FIXTURE, "--set", "max_iters=many"],
        &["spectrum", "--input", FIXTURE, "--set", "novalue"],
        &["vqe", "--input", FIXTURE, "--taper"],
        &["spectrum"],
        &["frobnicate"],
    ];
    for args in cases {
        assert_eq!(chemsim(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn malformed_fcidump_exits_2_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.fcidump");
    let text = std::fs::read_to_string(FIXTURE).unwrap() + "garbage here\n";
    let line = text.lines().count();
    std::fs::write(&bad, text).unwrap();
    let out = chemsim(&["spectrum", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(&line.to_string()));
}

#[test]
fn qpe_and_qite_approach_the_ground_energy() {
    let v = run_ok(&["qpe", "--input", FIXTURE, "--seed", "3", "--set", "ancillas=8"]);
    let r = &v["result"];
    let res = r["resolution"].as_f64().unwrap();
    assert!((r["energy"].as_f64().unwrap() - FCI).abs() <= res);
    let v = run_ok(&["qite", "--input", FIXTURE, "--seed", "3", "--set", "steps=30"]);
    let r = &v["result"];
    assert!((r["final_energy"].as_f64().unwrap() - FCI).abs() < 1e-4);
    assert!(r["max_reference_deviation"].as_f64().unwrap() < 1e-6);
}

#[test]
fn mitigation_techniques_improve_on_raw() {
    let v = run_ok(&["mitigate", "--input", FIXTURE, "--seed", "3"]);
    let r = &v["result"];
    let exact = r["exact"].as_f64().unwrap();
    assert!((r["mitigated"].as_f64().unwrap() - exact).abs() < (r["raw"].as_f64().unwrap() - exact).abs());
    let v = run_ok(&["mitigate", "--input", FIXTURE, "--seed", "3", "--set", "technique=readout"]);
    let r = &v["result"];
    assert!(r["mitigated_total_variation"].as_f64().unwrap() < r["raw_total_variation"].as_f64().unwrap());
    let v = run_ok(&["mitigate", "--input", FIXTURE, "--seed", "3", "--set", "technique=postselect", "--set", "initial=hf"]);
    let r = &v["result"]["result"];
    let exact = r["exact"].as_f64().unwrap();
    assert!((r["post_selected"].as_f64().unwrap() - exact).abs() < (r["raw"].as_f64().unwrap() - exact).abs());
}

#[test]
fn envelope_records_provenance() {
    let v = run_ok(&["spectrum", "--input", FIXTURE, "--seed", "8"]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "spectrum");
    assert_eq!(v["chemsim_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    // Without --seed, a drawn seed is still recorded.
    let v = run_ok(&["spectrum", "--input", FIXTURE]);
    assert!(v["seed"].as_u64().is_some());
}
