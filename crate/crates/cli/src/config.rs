//! Strict loading of scenario configuration files.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Cat,
    Epr,
    Ghz,
    HistoriesCheck,
    Worlds,
    Minds,
    Facts,
    BohmEvolve,
    BohmTrajectories,
    BohmMeasure,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 10] = [
        ScenarioKind::Cat,
        ScenarioKind::Epr,
        ScenarioKind::Ghz,
        ScenarioKind::HistoriesCheck,
        ScenarioKind::Worlds,
        ScenarioKind::Minds,
        ScenarioKind::Facts,
        ScenarioKind::BohmEvolve,
        ScenarioKind::BohmTrajectories,
        ScenarioKind::BohmMeasure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Cat => "cat",
            ScenarioKind::Epr => "epr",
            ScenarioKind::Ghz => "ghz",
            ScenarioKind::HistoriesCheck => "histories-check",
            ScenarioKind::Worlds => "worlds",
            ScenarioKind::Minds => "minds",
            ScenarioKind::Facts => "facts",
            ScenarioKind::BohmEvolve => "bohm-evolve",
            ScenarioKind::BohmTrajectories => "bohm-trajectories",
            ScenarioKind::BohmMeasure => "bohm-measure",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::Cat => "cat measures an electron; Bell-basis check with and without an environment qubit",
            ScenarioKind::Epr => "repeated spin measurements on both wings of an EPR pair",
            ScenarioKind::Ghz => "three-particle parity contradiction against predetermined spin values",
            ScenarioKind::HistoriesCheck => "decoherence functional, consistency class, sum rule and history sampling",
            ScenarioKind::Worlds => "many-worlds frequency measure from exact binomial tails and an unfolded tree",
            ScenarioKind::Minds => "many-minds transitions: direct versus step-by-step composition",
            ScenarioKind::Facts => "true and reliable facts across a retrodiction family of history sets",
            ScenarioKind::BohmEvolve => "split-step evolution of a grid wavefunction with analytic oracles",
            ScenarioKind::BohmTrajectories => "Bohmian trajectories and the equivariance KS test",
            ScenarioKind::BohmMeasure => "two-coordinate position measurement and the momentum probe",
        }
    }

    /// Accepted `params` keys; every key is optional and has a default.
    pub fn params(self) -> &'static [&'static str] {
        match self {
            ScenarioKind::Cat => &["include_environment"],
            ScenarioKind::Epr => &["runs", "wing_b_first"],
            ScenarioKind::Ghz => &[],
            ScenarioKind::HistoriesCheck => {
                &["set", "custom_set", "initial_state", "sample", "samples", "max_coarse_grainings"]
            }
            ScenarioKind::Worlds => &["p", "eps", "checks", "curve_max", "tree_splits"],
            ScenarioKind::Minds => &["scenario"],
            ScenarioKind::Facts => &["known", "candidates"],
            ScenarioKind::BohmEvolve => &[
                "potential", "omega", "grid", "center", "sigma", "k0", "mass", "hbar", "total_time", "dt",
                "snapshots", "continuity_sizes",
            ],
            ScenarioKind::BohmTrajectories => {
                &["demo", "particles", "total_time", "dt", "checkpoints", "gradient", "record_particles", "record_stride"]
            }
            ScenarioKind::BohmMeasure => &["mode", "position", "momentum"],
        }
    }
}

/// Thresholds used by scenario verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Exact-value comparisons.
    pub verdict: f64,
    /// Off-diagonal decoherence bound; `None` uses the scale-aware default.
    pub consistency: Option<f64>,
    /// Probability sum rule under coarse-graining.
    pub sum_rule: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { verdict: 1e-10, consistency: None, sum_rule: 1e-8 }
    }
}

impl Tolerances {
    /// Every tolerance set to `tol`.
    pub fn uniform(tol: f64) -> Self {
        Self { verdict: tol, consistency: Some(tol), sum_rule: tol }
    }

    fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.verdict) {
            return Err(CliError::Validation(format!("tolerances.verdict: must be positive, got {}", self.verdict)));
        }
        if let Some(c) = self.consistency.filter(|&c| !ok(c)) {
            return Err(CliError::Validation(format!("tolerances.consistency: must be positive, got {c}")));
        }
        if !ok(self.sum_rule) {
            return Err(CliError::Validation(format!("tolerances.sum_rule: must be positive, got {}", self.sum_rule)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: ScenarioConfig = deserialize_strict(text, "")?;
        if !config.params.is_object() {
            return Err(CliError::Validation("params: expected an object".into()));
        }
        config.tolerances.validate()?;
        Ok(config)
    }

    /// Apply command-line overrides.
    pub fn with_overrides(mut self, seed: Option<u64>, tol: Option<f64>) -> Result<Self> {
        if let Some(seed) = seed {
            self.seed = seed;
        }
        if let Some(tol) = tol {
            self.tolerances = Tolerances::uniform(tol);
            self.tolerances.validate().map_err(|_| CliError::Validation(format!("--tol: must be positive, got {tol}")))?;
        }
        Ok(self)
    }
}

fn deserialize_strict<T: DeserializeOwned>(text: &str, prefix: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| located(prefix, e))?;
    de.end().map_err(|e| CliError::Validation(format!("trailing content: {e}")))?;
    Ok(value)
}

fn located(prefix: &str, e: serde_path_to_error::Error<serde_json::Error>) -> CliError {
    let path = e.path().to_string();
    let field = match (prefix.is_empty(), path == ".") {
        (true, true) => "config".to_string(),
        (true, false) => path,
        (false, true) => prefix.to_string(),
        (false, false) => format!("{prefix}.{path}"),
    };
    CliError::Validation(format!("{field}: {}", e.inner()))
}

/// Decode a scenario's `params` table; unknown keys are rejected.
pub fn parse_params<T: DeserializeOwned>(params: &Value) -> Result<T> {
    serde_path_to_error::deserialize(params).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "params".to_string() } else { format!("params.{path}") };
        CliError::Validation(format!("{field}: {}", e.inner()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = ScenarioConfig::parse(r#"{"scenario": "ghz"}"#).unwrap();
        assert_eq!(c.scenario, ScenarioKind::Ghz);
        assert_eq!(c.seed, 0);
        assert_eq!(c.tolerances, Tolerances::default());
        assert!(c.params.as_object().unwrap().is_empty());
    }

    #[test]
    fn unknown_top_level_key_names_the_field() {
        let err = ScenarioConfig::parse(r#"{"scenario": "ghz", "sede": 3}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("sede"), "{err}");
    }

    #[test]
    fn unknown_scenario_is_rejected() {
        let err = ScenarioConfig::parse(r#"{"scenario": "copenhagen"}"#).unwrap_err();
        assert!(err.to_string().contains("scenario"), "{err}");
    }

    #[test]
    fn tolerance_errors_name_the_field() {
        let err = ScenarioConfig::parse(r#"{"scenario": "cat", "tolerances": {"verdict": -1}}"#).unwrap_err();
        assert!(err.to_string().contains("tolerances.verdict"), "{err}");
        let err = ScenarioConfig::parse(r#"{"scenario": "cat", "tolerances": {"verdcit": 1}}"#).unwrap_err();
        assert!(err.to_string().contains("verdcit"), "{err}");
    }

    #[test]
    fn params_must_be_an_object() {
        assert!(ScenarioConfig::parse(r#"{"scenario": "cat", "params": [1]}"#).is_err());
    }

    #[test]
    fn overrides_replace_seed_and_tolerances() {
        let c = ScenarioConfig::parse(r#"{"scenario": "cat", "seed": 4}"#).unwrap();
        let c = c.with_overrides(Some(9), Some(1e-6)).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.tolerances, Tolerances::uniform(1e-6));
        let c = ScenarioConfig::parse(r#"{"scenario": "cat"}"#).unwrap();
        assert!(c.with_overrides(None, Some(0.0)).is_err());
    }

    #[test]
    fn nested_param_errors_carry_their_path() {
        #[derive(Debug, Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Inner {
            #[allow(dead_code)]
            a: u32,
        }
        #[derive(Debug, Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Outer {
            #[allow(dead_code)]
            inner: Inner,
        }
        let v: Value = serde_json::from_str(r#"{"inner": {"a": 1, "b": 2}}"#).unwrap();
        let err = parse_params::<Outer>(&v).unwrap_err();
        assert!(err.to_string().contains("params.inner"), "{err}");
        assert!(err.to_string().contains("`b`"), "{err}");
    }

    #[test]
    fn every_scenario_round_trips_its_name() {
        for kind in ScenarioKind::ALL {
            let text = format!(r#"{{"scenario": "{}"}}"#, kind.name());
            assert_eq!(ScenarioConfig::parse(&text).unwrap().scenario, kind);
        }
    }
}
