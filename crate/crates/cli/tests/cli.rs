use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qmwb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmwb")).args(args).output().expect("binary runs")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    qmwb(&args)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn list_prints_ten_rows() {
    let o = qmwb(&["list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().any(|l| l.starts_with("histories-check")));
}

#[test]
fn list_json_is_an_array_of_ten() {
    let o = qmwb(&["list", "--json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r["name"].is_string() && r["description"].is_string() && r["params"].is_array()));
}

#[test]
fn unknown_subcommand_exits_two_with_usage() {
    let o = qmwb(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn ghz_run_reports_no_satisfying_assignment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&configs_dir().join("ghz.json"), &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["tool"], "qmwb");
    assert_eq!(r["scenario"], "ghz");
    assert!(r["version"].is_string());
    assert!(r["timestamp"].is_string());
    assert_eq!(r["report"]["satisfying_assignment_count"], 0);
    assert_eq!(r["report"]["refutes"], true);
    assert_eq!(r["config"]["scenario"], "ghz");
}

#[test]
fn unknown_key_exits_two_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), r#"{"scenario": "ghz", "colour": "red"}"#);
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    assert!(!out.exists());
}

#[test]
fn unknown_param_key_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), r#"{"scenario": "epr", "params": {"runz": 3}}"#);
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("runz"));
    assert!(!out.exists());
}

#[test]
fn bad_values_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    for (text, field) in [
        (r#"{"scenario": "epr", "params": {"runs": 0}}"#, "params.runs"),
        (r#"{"scenario": "worlds", "params": {"p": 1.5}}"#, "params.p"),
        (r#"{"scenario": "bohm-evolve", "params": {"dt": -0.1}}"#, "params.dt"),
        (r#"{"scenario": "bohm-evolve", "params": {"grid": {"points": 4, "start": 0, "end": 1}}}"#, "params.grid"),
        (r#"{"scenario": "histories-check", "params": {"set": "custom"}}"#, "params.custom_set"),
        (r#"{"scenario": "facts", "params": {"known": "plus"}}"#, "params.known"),
        (r#"{"scenario": "minds", "params": {"scenario": "telepathy"}}"#, "params.scenario"),
    ] {
        let out = tmp.path().join("out");
        let cfg = write_config(tmp.path(), text);
        let o = run(&cfg, &out, &[]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(field), "{text}: {err}");
        assert!(!out.exists());
    }
}

#[test]
fn unreadable_or_malformed_config_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&tmp.path().join("missing.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write_config(tmp.path(), "{ not json");
    assert_eq!(run(&cfg, &out, &[]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn sampling_an_inconsistent_set_is_an_engine_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), r#"{"scenario": "histories-check", "params": {"set": "interference", "sample": true}}"#);
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Inconsistent"));
    assert!(!out.exists());
}

#[test]
fn same_seed_gives_identical_output() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["epr.json", "histories-decoherent.json", "worlds.json"] {
        let cfg = configs_dir().join(name);
        let (a, b) = (tmp.path().join(format!("{name}-a")), tmp.path().join(format!("{name}-b")));
        assert!(run(&cfg, &a, &[]).status.success());
        assert!(run(&cfg, &b, &[]).status.success());
        let mut ra = report(&a);
        let mut rb = report(&b);
        ra.as_object_mut().unwrap().remove("timestamp");
        rb.as_object_mut().unwrap().remove("timestamp");
        assert_eq!(ra, rb, "{name}");
        for file in ra["outputs"].as_array().unwrap() {
            let f = file.as_str().unwrap();
            assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{name}/{f}");
        }
    }
}

#[test]
fn seed_and_tolerance_overrides_are_echoed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("epr.json");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&cfg, &a, &["--seed", "99", "--tol", "1e-6"]).status.success());
    assert!(run(&cfg, &b, &[]).status.success());
    let (ra, rb) = (report(&a), report(&b));
    assert_eq!(ra["seed"], 99);
    assert_eq!(ra["config"]["tolerances"]["verdict"], 1e-6);
    assert_eq!(ra["report"]["all_anticorrelated"], true);
    assert_ne!(ra["report"]["wing_a_up_frequency"], rb["report"]["wing_a_up_frequency"]);
}

#[test]
fn effective_params_are_echoed_with_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), r#"{"scenario": "epr"}"#);
    assert!(run(&cfg, &out, &[]).status.success());
    let r = report(&out);
    assert_eq!(r["config"]["params"]["runs"], 1000);
    assert_eq!(r["config"]["params"]["wing_b_first"], false);
}

#[test]
fn every_shipped_config_parses() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|x| x == "json") {
            let text = std::fs::read_to_string(&p).unwrap();
            qmwb_scenarios::ScenarioConfig::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 10);
}

#[test]
fn csv_outputs_are_listed_and_written() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert!(run(&configs_dir().join("bohm-evolve.json"), &out, &[]).status.success());
    let r = report(&out);
    let outputs: Vec<&str> = r["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(outputs.len(), 5);
    let first = std::fs::read_to_string(out.join(outputs[0])).unwrap();
    assert_eq!(first.lines().next(), Some("x,prob_density,current"));
    assert_eq!(first.lines().count(), 1025);
    assert!(r["report"]["max_relative_width_error"].as_f64().unwrap() < 1e-3);
    assert!(r["report"]["continuity"]["slope"].as_f64().unwrap() >= 1.8);
}
