use std::process::{Command, Output};

use afrelay::sweep::{run_sweep, to_csv, Axis, Metric, SweepSpec};
use afrelay::table::TableDump;
use afrelay::{E2eModel, ModulationSpec, SystemConfig};
use serde_json::Value;

fn afrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afrelay")).args(args).env_remove("AFRELAY_THREADS").output().unwrap()
}

fn stdout_ok(args: &[&str]) -> String {
    let out = afrelay(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    afrelay(args).status.code().unwrap()
}

#[test]
fn analyze_equals_library() {
    let v: Value =
        serde_json::from_str(&stdout_ok(&["analyze", "--num-relays", "3", "--rho1", "0.5", "--d1", "0.3"])).unwrap();
    let cfg = SystemConfig { num_relays: 3, rho1: 0.5, d1: 0.3, ..Default::default() };
    let m = E2eModel::from_config(&cfg).unwrap();
    assert_eq!(v["outage"].as_f64().unwrap(), m.outage(1.0).unwrap());
    assert_eq!(v["ser"].as_f64().unwrap(), m.ser(&ModulationSpec::bpsk()).unwrap());
    assert_eq!(v["mgf"].as_f64().unwrap(), m.mgf(1.0).unwrap());
    assert_eq!(v["derived"]["C"].as_f64().unwrap(), afrelay::config::derive_with_table(&cfg).unwrap().0.c);
}

#[test]
fn sweep_csv_is_identical_across_thread_counts() {
    let args = [
        "sweep",
        "--preset",
        "fig1",
        "--grid",
        "0.2:0.8:0.2",
        "--metrics",
        "outage,ser,mgf",
        "--mc-trials",
        "20000",
        "--seed",
        "7",
    ];
    let runs: Vec<String> = ["1", "4", "16"]
        .iter()
        .map(|t| {
            let mut a = vec!["--threads", t];
            a.extend_from_slice(&args);
            stdout_ok(&a)
        })
        .collect();
    assert!(runs.iter().all(|r| r == &runs[0]));
    assert_eq!(runs[0].lines().count(), 5);
    assert!(runs[0].starts_with("axis,value,sigma1,sigma2,C,outage_an,outage_mc,outage_se,ser_an,ser_mc,ser_se,mgf_an"));
    // env var selects the thread count too
    let out = Command::new(env!("CARGO_BIN_EXE_afrelay")).args(args).env("AFRELAY_THREADS", "3").output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), runs[0]);
}

#[test]
fn sweep_equals_library_rendering() {
    let csv =
        stdout_ok(&["sweep", "--axis", "rho1", "--grid", "0,0.5,1", "--metrics", "outage,mgf", "--num-relays", "3"]);
    let spec = SweepSpec {
        axis: Axis::Rho1,
        grid: vec![0.0, 0.5, 1.0],
        metrics: vec![Metric::Outage, Metric::Mgf],
        base: SystemConfig { num_relays: 3, ..SweepSpec::fig1(2, 0.9, 0.9).base },
        ..SweepSpec::fig1(2, 0.9, 0.9)
    };
    assert_eq!(csv, to_csv(&spec, &run_sweep(&spec).unwrap()));
    let json: Value =
        serde_json::from_str(&stdout_ok(&["sweep", "--axis", "rho1", "--grid", "0,1", "--json"])).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 2);
}

#[test]
fn spec_and_config_files_overlay_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, r#"{"num_relays": 1, "eta1_db": 20.0}"#).unwrap();
    let v: Value = serde_json::from_str(&stdout_ok(&[
        "analyze",
        "--config",
        cfg_path.to_str().unwrap(),
        "--num-relays",
        "4",
        "--rho1",
        "0.3",
    ]))
    .unwrap();
    assert_eq!(v["config"]["num_relays"], 1);
    assert_eq!(v["config"]["eta1_db"], 20.0);
    assert_eq!(v["config"]["rho1"], 0.3);

    let spec_path = dir.path().join("spec.json");
    std::fs::write(&spec_path, r#"{"axis": "num_relays", "grid": [1, 2, 3], "metrics": ["outage"]}"#).unwrap();
    let out_path = dir.path().join("out.csv");
    stdout_ok(&["sweep", "--spec", spec_path.to_str().unwrap(), "-o", out_path.to_str().unwrap()]);
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(csv.lines().nth(1).unwrap().split(',').next().unwrap(), "num_relays");
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn table_dump_round_trips() {
    let text = stdout_ok(&["table", "--num-relays", "2", "--d1", "0.4"]);
    let dump: TableDump = serde_json::from_str(&text).unwrap();
    assert_eq!(dump.term_count, 16);
    assert_eq!(serde_json::to_string_pretty(&dump).unwrap().trim(), text.trim());
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["analyze", "--d1", "1.5"]), 1);
    assert_eq!(code(&["analyze", "--bogus"]), 1);
    assert_eq!(code(&["sweep", "--grid", "0.5,0.2"]), 1);
    assert_eq!(code(&["sweep", "--axis", "nope"]), 1);
    assert_eq!(code(&["analyze", "--config", "/nonexistent.json"]), 1);
    assert_eq!(code(&["simulate", "--trials", "10"]), 1);
    assert_eq!(code(&["--threads", "0", "analyze"]), 1);
    // precision loss in the alternating mixture is a numerical failure
    assert_eq!(code(&["analyze", "--num-relays", "40"]), 2);
    assert_eq!(code(&["validate", "--mc-trials", "20000"]), 0);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn simulate_reports_rng_metadata() {
    let v: Value =
        serde_json::from_str(&stdout_ok(&["simulate", "--trials", "20000", "--seed", "3", "--modulation", "dbpsk"]))
            .unwrap();
    assert_eq!(v["gaussian"], "marsaglia-polar");
    let (ser, mgf) = (v["ser"]["value"].as_f64().unwrap(), v["mgf"]["value"].as_f64().unwrap());
    assert!((ser - 0.5 * mgf).abs() < 1e-15);
}
