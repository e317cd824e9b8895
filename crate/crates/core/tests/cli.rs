use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adaptive-sim"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn sim(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_scenario(dir: &Path, controllers: &str) -> PathBuf {
    let text = format!(
        r#"{{
  "gains": {{"k1": [10, 6], "k2": [3, 1.8], "ki": [0.05, 0.05],
            "adapt": {{"gamma": 6, "delta0": 0.001, "w0": 10}}}},
  "robot": {{"m1": 0.8, "m2": 0.2, "l1": 0.5, "l2": 0.4, "g": 9.8}},
  "controllers": [{controllers}],
  "duration": 10, "dt": 0.01, "seed": 5,
  "pe": {{"T0": 12.566370614359172}}
}}"#
    );
    let path = dir.join("scenario.json");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn missing_scenario_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = sim(&["run", "--scenario", "/nonexistent/scenario.json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn zero_step_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let s = scenario("paper_section5.json");
    let out = sim(&["run", "--scenario", s.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--dt", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_field_names_its_path() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"gains": {"k1": "ten"}, "controllers": [], "duration": 1, "dt": 0.01}"#).unwrap();
    let out = sim(&["run", "--scenario", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gains.k1"));
}

#[test]
fn run_writes_series_and_summary() {
    let dir = TempDir::new().unwrap();
    let s = scenario("paper_section5.json");
    let out = sim(&[
        "run", "--scenario", s.to_str().unwrap(), "--out", dir.path().to_str().unwrap(),
        "--duration", "30", "--controllers", "RBFNN-O",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["timeseries.csv", "summary.json", "network_final.json", "weights.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["window"], serde_json::json!([10.0, 30.0]));
    assert_eq!(summary["mate"].as_array().unwrap().len(), 2);
    assert_eq!(summary["maae"].as_array().unwrap().len(), 2);
    let csv = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3002);
    assert!(csv.starts_with("t,q1,q2,"));
    let net = read_json(&dir.path().join("network_final.json"));
    assert_eq!(net["centers"].as_array().unwrap().len(), 20);
}

#[test]
fn compare_with_one_and_with_duplicate_controllers() {
    let dir = TempDir::new().unwrap();
    let s = write_scenario(dir.path(), r#"{"label": "MBFF", "kind": "mbff"}, {"label": "MBFF", "kind": "mbff"}"#);
    let one = dir.path().join("one");
    let out = sim(&[
        "compare", "--scenario", s.to_str().unwrap(), "--out", one.to_str().unwrap(), "--controllers", "MBFF",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = read_json(&one.join("table.json"));
    assert_eq!(table.as_object().unwrap().len(), 1);

    let two = dir.path().join("two");
    let out = sim(&["compare", "--scenario", s.to_str().unwrap(), "--out", two.to_str().unwrap()]);
    assert!(out.status.success());
    let table = read_json(&two.join("table.json"));
    assert_eq!(table["MBFF"], table["MBFF#2"]);
    assert_eq!(
        fs::read(two.join("00_MBFF.csv")).unwrap(),
        fs::read(two.join("01_MBFF.csv")).unwrap()
    );
}

#[test]
fn unknown_controller_label_is_rejected() {
    let dir = TempDir::new().unwrap();
    let s = scenario("paper_section5.json");
    let out = sim(&[
        "compare", "--scenario", s.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--controllers", "LQR",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nodes_for_lattice_and_single_cluster() {
    let dir = TempDir::new().unwrap();
    let s = write_scenario(
        dir.path(),
        r#"{"label": "L", "kind": "rbfnn", "network": {"source": "lattice", "levels": [-1, 0, 1], "sigma": 1.1}},
           {"label": "C", "kind": "rbfnn", "network": {"source": "kmeans", "nodes": 1, "sigma": 1.1}}"#,
    );
    let out_dir = dir.path().join("nodes");
    let out = sim(&["nodes", "--scenario", s.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let lattice = read_json(&out_dir.join("centers_00_L.json"));
    assert_eq!(lattice["centers"].as_array().unwrap().len(), 729);
    let csv = fs::read_to_string(out_dir.join("nodes_vs_trajectory_00_L.csv")).unwrap();
    assert_eq!(csv.lines().count(), 730);

    // one cluster sits at the mean of one period of samples, which is ~0
    let single = read_json(&out_dir.join("centers_01_C.json"));
    let c = single["centers"][0].as_array().unwrap();
    assert_eq!(c.len(), 6);
    for v in c {
        assert!(v.as_f64().unwrap().abs() < 1e-2, "{v}");
    }
}

#[test]
fn nodes_are_reproducible_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let s = scenario("paper_section5.json");
    let mut outputs = Vec::new();
    for k in 0..2 {
        let d = dir.path().join(format!("n{k}"));
        let out = sim(&["nodes", "--scenario", s.to_str().unwrap(), "--out", d.to_str().unwrap()]);
        assert!(out.status.success());
        outputs.push(fs::read(d.join("centers_03_RBFNN-O.json")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn pe_for_single_node_at_setpoint() {
    let dir = TempDir::new().unwrap();
    let s = scenario("setpoint_single_node.json");
    let out = sim(&["pe", "--scenario", s.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("pe_report.json"));
    let r = &report["RBFNN-1"];
    assert!((r["alpha1"].as_f64().unwrap() - 10.0).abs() < 1e-9);
    assert!((r["alpha2"].as_f64().unwrap() - 10.0).abs() < 1e-9);
    assert_eq!(r["verdict"], "PE");
    let g = fs::read_to_string(dir.path().join("gramian.csv")).unwrap();
    assert!((g.trim().parse::<f64>().unwrap() - 10.0).abs() < 1e-9);
}

#[test]
fn pe_flags_duplicated_centers() {
    let dir = TempDir::new().unwrap();
    let s = write_scenario(
        dir.path(),
        r#"{"label": "D", "kind": "rbfnn", "network": {"source": "centers", "sigma": 1.1,
            "centers": [[0, 1, 1, 0, 0, -1], [0, 1, 1, 0, 0, -1]]}}"#,
    );
    let out = sim(&["pe", "--scenario", s.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("pe_report.json"));
    assert_eq!(report["D"]["verdict"], "not PE");
}
