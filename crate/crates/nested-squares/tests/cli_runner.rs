use std::path::Path;
use std::process::{Command, Output};

use nsq::runner::{run_experiment, Experiment, ExperimentConfig, Overrides};
use nsq::NsqError;

fn nsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsq")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn body(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    let (head, rest) = text.split_once('\n').unwrap();
    assert!(head.starts_with("# nsq "), "{head}");
    rest.to_string()
}

#[test]
fn empty_config_lists_missing_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.json", "");
    let out = nsq(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("missing fields: experiment, seed"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_keys_and_bad_values_are_schema_errors() {
    let dir = tempfile::tempdir().unwrap();
    for (i, text) in [
        r#"{"experiment": "code-audit", "seed": 1, "colour": "red"}"#,
        r#"{"experiment": "code-audit", "seed": 1, "tolerance": -1}"#,
        r#"{"experiment": "no-such-thing", "seed": 1}"#,
        r#"{"experiment": "frame-deferred", "seed": 1, "rounds": []}"#,
        "[1, 2]",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write(dir.path(), &format!("c{i}.json"), text);
        let out = nsq(&["--config", &cfg, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{text}");
    }
    assert!(!dir.path().join("code-audit.csv").exists());
}

#[test]
fn flags_override_the_config() {
    let ov = Overrides {
        experiment: Some(Experiment::ToffoliCheck),
        seed: Some(9),
        out: None,
    };
    let cfg = ExperimentConfig::load(Some(r#"{"experiment": "code-audit", "seed": 1}"#), &ov).unwrap();
    assert_eq!(cfg.experiment, Experiment::ToffoliCheck);
    assert_eq!(cfg.seed, 9);
    let cfg = ExperimentConfig::load(None, &ov).unwrap();
    assert_eq!(cfg.rounds, vec![2, 3]);
    assert!(matches!(
        ExperimentConfig::load(None, &Overrides::default()),
        Err(NsqError::Config(_))
    ));
}

#[test]
fn failure_estimate_reports_both_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = nsq(&["--experiment", "failure-estimate", "--seed", "0", "--out", d]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("failure_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["common_quadratic"], "341");
    assert_eq!(summary["present_quadratic"], "537");
    assert_eq!(summary["printed_common_quadratic"], "293");
    let sweep = std::fs::read_to_string(dir.path().join("failure_sweep.csv")).unwrap();
    assert_eq!(sweep.lines().next(), Some("p,e_common,e_present,ratio"));
    assert_eq!(sweep.lines().count(), 101);
}

#[test]
fn identical_seeds_give_identical_csv_bodies() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"experiment": "frame-deferred", "seed": 11, "rounds": [2], "trials": 2}"#);
    for d in [&a, &b] {
        let out = nsq(&["--config", &cfg, "--out", d.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(body(&a.path().join("frame-deferred.csv")), body(&b.path().join("frame-deferred.csv")));
}

#[test]
fn every_row_carries_an_anchor() {
    for e in [Experiment::CodeAudit, Experiment::ToffoliCheck, Experiment::FailureEstimate] {
        let cfg = ExperimentConfig::load(None, &Overrides { experiment: Some(e), seed: Some(2), out: None }).unwrap();
        let rep = run_experiment(&cfg).unwrap();
        assert!(!rep.rows.is_empty());
        assert!(rep.rows.iter().all(|r| !r.anchor.is_empty()), "{e}");
        assert!(rep.passed(), "{e}: {:?}", rep.first_failure());
    }
}

#[test]
fn code_audit_passes_and_dumps_its_state() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = nsq(&["--experiment", "code-audit", "--seed", "1", "--out", d, "--dump-state", "--workers", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let state: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("code-audit_state.json")).unwrap()).unwrap();
    assert_eq!(state["n_qubits"], 9);
    let csv = body(&dir.path().join("code-audit.csv"));
    assert!(csv.starts_with("check,anchor,value,tolerance,pass,detail\n"));
    assert!(!csv.contains(",false,"));
}

#[test]
fn failing_check_exits_one_and_is_named() {
    // vanish noise keeps the particle populations, so the I/8 row fails
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"experiment": "noise-sweep", "seed": 4, "trials": 3, "families": ["mixture", "loss"]}"#,
    );
    let out = nsq(&["--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("first failing check: vanish on P0 leaves I/8"), "{err}");
    let csv = body(&dir.path().join("noise-sweep.csv"));
    assert_eq!(csv.matches(",false,").count(), 3);
}

#[test]
fn explicit_channels_replace_the_random_draw() {
    let cfg = ExperimentConfig::load(
        Some(
            r#"{"experiment": "noise-sweep", "seed": 1, "channels": [
                {"family": "dephasing_vanish", "particle": "P2"},
                {"family": "correctable_pauli_mixture", "seed": 3, "k": 4}
            ]}"#,
        ),
        &Overrides::default(),
    )
    .unwrap();
    let rep = run_experiment(&cfg).unwrap();
    let channel_rows: Vec<_> = rep.rows.iter().filter(|r| r.check.starts_with("channel")).collect();
    assert_eq!(channel_rows.len(), 4);
    assert!(channel_rows[0].check.contains("dephasing_vanish on P2"));
    assert!(channel_rows.iter().all(|r| r.pass));
}
