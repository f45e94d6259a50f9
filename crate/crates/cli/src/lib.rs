//! Scenario runner behind the `qmwb` binary: strict config loading, engine
//! dispatch and deterministic report output.

pub mod config;
pub mod error;
pub mod scenarios;

use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::Serialize;
use serde_json::Value;

pub use config::{ScenarioConfig, ScenarioKind, Tolerances};
pub use error::{CliError, Result};

pub const TOOL: &str = "qmwb";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const REPORT_FILE: &str = "report.json";

#[derive(Serialize)]
struct ConfigEcho<'a> {
    scenario: ScenarioKind,
    seed: u64,
    params: &'a Value,
    tolerances: &'a Tolerances,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    tool: &'static str,
    version: &'static str,
    scenario: &'static str,
    seed: u64,
    config: ConfigEcho<'a>,
    report: &'a Value,
    outputs: Vec<&'a str>,
    timestamp: String,
}

/// Files written by a successful run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub report: PathBuf,
    pub tables: Vec<PathBuf>,
}

/// Load, validate and run a config, then write `report.json` and the CSV
/// tables into `out`. Nothing is written unless the scenario succeeds.
pub fn run_file(path: &Path, out: &Path, seed: Option<u64>, tol: Option<f64>) -> Result<RunSummary> {
    let config = ScenarioConfig::load(path)?.with_overrides(seed, tol)?;
    run_config(&config, out)
}

pub fn run_config(config: &ScenarioConfig, out: &Path) -> Result<RunSummary> {
    if out.exists() && !out.is_dir() {
        return Err(CliError::Validation(format!("--out: {} is not a directory", out.display())));
    }
    let outcome = scenarios::run(config)?;
    let echo = ConfigEcho {
        scenario: config.scenario,
        seed: config.seed,
        params: &outcome.params,
        tolerances: &config.tolerances,
    };
    let file = ReportFile {
        tool: TOOL,
        version: VERSION,
        scenario: config.scenario.name(),
        seed: config.seed,
        config: echo,
        report: &outcome.report,
        outputs: outcome.tables.iter().map(|(name, _)| name.as_str()).collect(),
        timestamp: humantime::format_rfc3339_seconds(SystemTime::now()).to_string(),
    };
    let mut json = serde_json::to_string_pretty(&file).map_err(|e| CliError::Engine(format!("report: {e}")))?;
    json.push('\n');

    let write = |name: &str, text: &str| -> Result<PathBuf> {
        let p = out.join(name);
        std::fs::write(&p, text).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?;
        Ok(p)
    };
    std::fs::create_dir_all(out).map_err(|e| CliError::Output(format!("{}: {e}", out.display())))?;
    let tables = outcome.tables.iter().map(|(name, text)| write(name, text)).collect::<Result<Vec<_>>>()?;
    let report = write(REPORT_FILE, &json)?;
    Ok(RunSummary { report, tables })
}

#[derive(Serialize)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub params: &'static [&'static str],
}

pub fn scenario_table() -> Vec<ScenarioInfo> {
    ScenarioKind::ALL
        .iter()
        .map(|&k| ScenarioInfo { name: k.name(), description: k.description(), params: k.params() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ScenarioConfig {
        ScenarioConfig::parse(text).unwrap()
    }

    fn read_report(out: &Path) -> Value {
        serde_json::from_str(&std::fs::read_to_string(out.join(REPORT_FILE)).unwrap()).unwrap()
    }

    #[test]
    fn ghz_run_writes_report_with_echo() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("out");
        let summary = run_config(&config(r#"{"scenario": "ghz"}"#), &out).unwrap();
        assert_eq!(summary.report, out.join(REPORT_FILE));
        let r = read_report(&out);
        assert_eq!(r["tool"], TOOL);
        assert_eq!(r["version"], VERSION);
        assert_eq!(r["config"]["seed"], 0);
        assert_eq!(r["report"]["satisfying_assignment_count"], 0);
        assert_eq!(r["outputs"].as_array().unwrap().len(), summary.tables.len());
    }

    #[test]
    fn validation_errors_write_nothing() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("out");
        let e = run_config(&config(r#"{"scenario": "epr", "params": {"runs": 0}}"#), &out).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("params.runs"));
        assert!(!out.exists());
    }

    #[test]
    fn engine_errors_exit_three_and_write_nothing() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("out");
        let text = r#"{"scenario": "histories-check", "params": {"set": "interference", "sample": true}}"#;
        let e = run_config(&config(text), &out).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(!out.exists());
    }

    #[test]
    fn out_path_that_is_a_file_is_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("file");
        std::fs::write(&out, "x").unwrap();
        let e = run_config(&config(r#"{"scenario": "ghz"}"#), &out).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn missing_config_file_is_a_validation_error() {
        let tmp = tempfile::tempdir().unwrap();
        let e = run_file(&tmp.path().join("nope.json"), &tmp.path().join("out"), None, None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn repeated_runs_match_apart_from_timestamp() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = config(r#"{"scenario": "epr", "seed": 11, "params": {"runs": 300}}"#);
        let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
        run_config(&cfg, &a).unwrap();
        run_config(&cfg, &b).unwrap();
        let (mut ra, mut rb) = (read_report(&a), read_report(&b));
        ra.as_object_mut().unwrap().remove("timestamp");
        rb.as_object_mut().unwrap().remove("timestamp");
        assert_eq!(ra, rb);
    }

    #[test]
    fn overrides_replace_seed_and_all_tolerances() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("c.json");
        std::fs::write(&path, r#"{"scenario": "cat", "seed": 3}"#).unwrap();
        let out = tmp.path().join("out");
        run_file(&path, &out, Some(42), Some(1e-6)).unwrap();
        let r = read_report(&out);
        assert_eq!(r["seed"], 42);
        for key in ["verdict", "consistency", "sum_rule"] {
            assert_eq!(r["config"]["tolerances"][key], 1e-6, "{key}");
        }
    }

    #[test]
    fn scenario_table_lists_every_kind_once() {
        let table = scenario_table();
        assert_eq!(table.len(), ScenarioKind::ALL.len());
        let mut names: Vec<_> = table.iter().map(|s| s.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), table.len());
    }
}
