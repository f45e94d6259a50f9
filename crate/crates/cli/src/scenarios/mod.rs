//! Scenario runners. Each one decodes its params, runs an engine and returns
//! the report and CSV tables in memory; nothing touches the disk here.

mod bohm;
mod foundations;
mod histories;
mod interpretations;

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::config::{ScenarioConfig, ScenarioKind, Tolerances};
use crate::error::{CliError, Result};

pub use histories::{sum_rule_survey, SumRuleSurvey};

/// Seed and tolerances shared by every runner.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: u64,
    pub tolerances: Tolerances,
}

/// A finished run: effective params, engine report, CSV tables by file name.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub params: Value,
    pub report: Value,
    pub tables: Vec<(String, String)>,
}

impl Outcome {
    fn new(params: &impl Serialize, report: &impl Serialize) -> Result<Self> {
        Ok(Self { params: to_value(params)?, report: to_value(report)?, tables: Vec::new() })
    }

    fn table(mut self, name: impl Into<String>, csv: Csv) -> Self {
        self.tables.push((name.into(), csv.finish()));
        self
    }
}

fn to_value(v: &impl Serialize) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Engine(format!("report serialisation: {e}")))
}

pub fn run(config: &ScenarioConfig) -> Result<Outcome> {
    let ctx = Context { seed: config.seed, tolerances: config.tolerances.clone() };
    let p = &config.params;
    match config.scenario {
        ScenarioKind::Cat => foundations::cat(p, &ctx),
        ScenarioKind::Epr => foundations::epr(p, &ctx),
        ScenarioKind::Ghz => foundations::ghz(p, &ctx),
        ScenarioKind::HistoriesCheck => histories::histories_check(p, &ctx),
        ScenarioKind::Worlds => interpretations::worlds(p, &ctx),
        ScenarioKind::Minds => interpretations::minds(p, &ctx),
        ScenarioKind::Facts => interpretations::facts(p, &ctx),
        ScenarioKind::BohmEvolve => bohm::evolve(p, &ctx),
        ScenarioKind::BohmTrajectories => bohm::trajectories(p, &ctx),
        ScenarioKind::BohmMeasure => bohm::measure(p, &ctx),
    }
}

/// Minimal CSV builder for numeric tables; fields never contain commas.
struct Csv {
    text: String,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    fn row(&mut self, fields: &[&dyn std::fmt::Display]) {
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            write!(self.text, "{f}").expect("writing to a String");
        }
        self.text.push('\n');
    }

    fn from_bytes(bytes: Vec<u8>) -> Self {
        Self { text: String::from_utf8(bytes).expect("CSV writers emit UTF-8") }
    }

    fn finish(self) -> String {
        self.text
    }
}

fn require(cond: bool, field: &str, msg: impl std::fmt::Display) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Validation(format!("params.{field}: {msg}")))
    }
}
