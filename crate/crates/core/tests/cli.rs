use std::process::Command;

use ndsd::experiments::{run_experiment, ExperimentReport, Params};
use ndsd::instruments::{bell_ensemble, sample_bounds, Adaptivity};

fn ndsd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ndsd"))
}

#[test]
fn writes_json_and_csv_reports() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let csv = dir.path().join("report.csv");
    let out = ndsd()
        .args(["--experiment", "mes6-cost", "--seed", "3", "--out"])
        .arg(&json)
        .arg("--csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success());

    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    for key in ["experiment", "params", "seed", "results", "runtime_ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["seed"], 3);
    let avg = v["results"].as_array().unwrap().iter().find(|r| r["claim"] == "mes6.average_ebits").unwrap();
    assert_eq!(avg["computed"], "8/3");
    assert_eq!(avg["basis"], "reported");

    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("experiment,claim,expected,computed,tolerance,basis,pass\n"));
    assert!(table.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn flags_reach_the_experiment() {
    let out = ndsd()
        .args(["--experiment", "locc-equiv", "--max-word-len", "1", "--samples", "10", "--restarts", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: ExperimentReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.params.max_word_len, 1);
    assert_eq!(report.params.samples, 10);
    assert_eq!(report.params.restarts, 2);
    let row = report.row("mes6.traces_zero_or_eight").unwrap();
    assert!(row.computed.starts_with("16 words"), "{}", row.computed);
}

#[test]
fn rejects_unknown_experiments_and_bad_budgets() {
    let out = ndsd().args(["--experiment", "nope"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bell3-cost"));
    let out = ndsd().args(["--experiment", "bell3-cost", "--samples", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_identical_apart_from_runtime() {
    let params = Params { samples: 300, restarts: 3, iterations: 100, max_word_len: 2 };
    let strip = |mut r: ExperimentReport| {
        r.runtime_ms = 0;
        r.to_json().unwrap()
    };
    for name in ["bound-check", "theorem2-check", "parity-demo"] {
        let a = strip(run_experiment(name, &params, 11).unwrap());
        let b = strip(run_experiment(name, &params, 11).unwrap());
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn sampling_does_not_depend_on_thread_count() {
    let ens = bell_ensemble(&[0, 1, 2]).unwrap();
    let parallel = sample_bounds(&ens, 400, 2, Adaptivity::OneWay, 5).unwrap();
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| sample_bounds(&ens, 400, 2, Adaptivity::OneWay, 5).unwrap());
    assert_eq!(parallel, serial);
}
