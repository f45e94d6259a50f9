//! Many-worlds, many-minds and facts scenarios.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qmwb_core::interpretations::{
    classify_fact, diagonal_minds_scenario, frequency_measure, interference_minds_scenario,
    many_minds_consistency_probe, retrodiction_family, spin_chain_unfold, tree_frequency_measure, FactStatus,
    MindsConsistencyReport, SetFactProbability, TimedFact,
};
use qmwb_core::{spin, Projector};

use super::{require, Context, Csv, Outcome};
use crate::config::parse_params;
use crate::error::Result;

/// Largest unfolded spin chain; the tree holds `2^(n+1)` states of dimension `2^n`.
const MAX_TREE_SPLITS: usize = 10;
/// Rows of a stochastic matrix may dip this far below zero from rounding.
const STOCHASTIC_FLOOR: f64 = -1e-12;
const ROW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrequencyCheck {
    splits: u32,
    threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct WorldsParams {
    /// Weight of the `+` branch at each split.
    p: f64,
    /// Half-width of the frequency window around `p`.
    eps: f64,
    checks: Vec<FrequencyCheck>,
    /// Largest `n` in the measure-versus-splits table.
    curve_max: u32,
    /// Length of the unfolded 50/50 spin chain cross-check; 0 disables it.
    tree_splits: usize,
}

impl Default for WorldsParams {
    fn default() -> Self {
        Self {
            p: 0.5,
            eps: 0.15,
            checks: vec![FrequencyCheck { splits: 12, threshold: 0.7 }, FrequencyCheck { splits: 20, threshold: 0.95 }],
            curve_max: 60,
            tree_splits: 8,
        }
    }
}

#[derive(Serialize)]
struct CheckResult {
    splits: u32,
    threshold: f64,
    measure: f64,
    exceeds: bool,
    /// Smallest `n ≤ curve_max` whose measure exceeds the threshold.
    min_splits: Option<u32>,
    /// Smallest `n` from which every `n' ≤ curve_max` exceeds it; the
    /// measure is not monotone in `n` because the window is discrete.
    stays_above_from: Option<u32>,
}

#[derive(Serialize)]
struct TreeCheck {
    splits: usize,
    leaves: usize,
    total_leaf_measure: f64,
    tree_measure: f64,
    exact_measure: f64,
    difference: f64,
    max_sibling_overlap: f64,
    max_conservation_error: f64,
}

#[derive(Serialize)]
struct WorldsOutput {
    checks: Vec<CheckResult>,
    tree: Option<TreeCheck>,
}

pub(super) fn worlds(params: &Value, _ctx: &Context) -> Result<Outcome> {
    let p: WorldsParams = parse_params(params)?;
    require(p.p > 0.0 && p.p < 1.0, "p", "must lie in (0, 1)")?;
    require(p.eps >= 0.0 && p.eps.is_finite(), "eps", "must be non-negative")?;
    require(p.curve_max >= 1, "curve_max", "must be at least 1")?;
    require(p.tree_splits <= MAX_TREE_SPLITS, "tree_splits", format!("at most {MAX_TREE_SPLITS}"))?;
    for (i, c) in p.checks.iter().enumerate() {
        require(c.splits >= 1, &format!("checks[{i}].splits"), "must be at least 1")?;
        require((0.0..=1.0).contains(&c.threshold), &format!("checks[{i}].threshold"), "must lie in [0, 1]")?;
    }

    let curve: Vec<(u32, f64)> = (1..=p.curve_max).map(|n| (n, frequency_measure(n, p.p, p.eps))).collect();
    let checks = p
        .checks
        .iter()
        .map(|c| {
            let measure = frequency_measure(c.splits, p.p, p.eps);
            CheckResult {
                splits: c.splits,
                threshold: c.threshold,
                measure,
                exceeds: measure > c.threshold,
                min_splits: curve.iter().find(|(_, m)| *m > c.threshold).map(|(n, _)| *n),
                stays_above_from: curve
                    .iter()
                    .rposition(|(_, m)| *m <= c.threshold)
                    .map_or(Some(1), |i| curve.get(i + 1).map(|(n, _)| *n)),
            }
        })
        .collect();

    let tree = if p.tree_splits == 0 {
        None
    } else {
        let t = spin_chain_unfold(p.tree_splits)?;
        let tree_measure = tree_frequency_measure(&t, 0.5, p.eps);
        let exact_measure = frequency_measure(p.tree_splits as u32, 0.5, p.eps);
        let (max_sibling_overlap, max_conservation_error) = t.invariant_errors();
        Some(TreeCheck {
            splits: p.tree_splits,
            leaves: t.leaves().len(),
            total_leaf_measure: t.total_leaf_measure(),
            tree_measure,
            exact_measure,
            difference: (tree_measure - exact_measure).abs(),
            max_sibling_overlap,
            max_conservation_error,
        })
    };

    let mut csv = Csv::new(&["splits", "measure"]);
    for (n, m) in &curve {
        csv.row(&[n, m]);
    }
    Ok(Outcome::new(&p, &WorldsOutput { checks, tree })?.table("worlds_frequency.csv", csv))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MindsChoice {
    Interference,
    Diagonal,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MindsParams {
    scenario: MindsChoice,
}

impl Default for MindsParams {
    fn default() -> Self {
        Self { scenario: MindsChoice::Both }
    }
}

#[derive(Serialize)]
struct MindsOutput {
    scenarios: Vec<MindsResult>,
}

#[derive(Serialize)]
struct MindsResult {
    #[serde(flatten)]
    report: MindsConsistencyReport,
    stochastic: bool,
}

pub(super) fn minds(params: &Value, _ctx: &Context) -> Result<Outcome> {
    let p: MindsParams = parse_params(params)?;
    let scenarios = match p.scenario {
        MindsChoice::Interference => vec![interference_minds_scenario()],
        MindsChoice::Diagonal => vec![diagonal_minds_scenario()],
        MindsChoice::Both => vec![interference_minds_scenario(), diagonal_minds_scenario()],
    };
    let mut results = Vec::new();
    let mut csv = Csv::new(&["scenario", "brain_state", "direct", "composed"]);
    for s in &scenarios {
        let report = many_minds_consistency_probe(s)?;
        for (k, (d, c)) in report.direct_occupancy.iter().zip(&report.composed_occupancy).enumerate() {
            csv.row(&[&report.scenario, &k, d, c]);
        }
        let stochastic = report.max_row_sum_error < ROW_SUM_TOL && report.min_entry >= STOCHASTIC_FLOOR;
        results.push(MindsResult { report, stochastic });
    }
    Ok(Outcome::new(&p, &MindsOutput { scenarios: results })?.table("minds_occupancy.csv", csv))
}

/// Rays of the retrodiction family: `u`, `v` and `(u ± v)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Ray {
    U,
    V,
    Plus,
    Minus,
}

impl Ray {
    fn projector(self) -> Projector {
        let s = match self {
            Ray::U => spin::z_up(),
            Ray::V => spin::z_down(),
            Ray::Plus => spin::x_up(),
            Ray::Minus => spin::x_down(),
        };
        Projector::onto_state(&s)
    }
}

/// Time of the intermediate slot and of the final `{u, v}` slot.
const CANDIDATE_TIME: f64 = 1.0;
const KNOWN_TIME: f64 = 2.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FactsParams {
    /// Outcome observed in the final `{u, v}` slot.
    known: Ray,
    /// Rays asserted at the intermediate time.
    candidates: Vec<Ray>,
}

impl Default for FactsParams {
    fn default() -> Self {
        Self { known: Ray::U, candidates: vec![Ray::U, Ray::V, Ray::Plus, Ray::Minus] }
    }
}

#[derive(Serialize)]
struct FactsOutput {
    known: Ray,
    verdicts: Vec<FactResult>,
}

#[derive(Serialize)]
struct FactResult {
    candidate: Ray,
    status: FactStatus,
    per_set: Vec<SetFactProbability>,
}

pub(super) fn facts(params: &Value, _ctx: &Context) -> Result<Outcome> {
    let p: FactsParams = parse_params(params)?;
    require(matches!(p.known, Ray::U | Ray::V), "known", "the final slot only houses u or v")?;
    require(!p.candidates.is_empty(), "candidates", "must not be empty")?;
    let (family, rho) = retrodiction_family();
    let known = [TimedFact { time: KNOWN_TIME, projector: p.known.projector() }];
    let mut results = Vec::new();
    let mut csv = Csv::new(&["candidate", "set_index", "probability"]);
    for &candidate in &p.candidates {
        let fact = TimedFact { time: CANDIDATE_TIME, projector: candidate.projector() };
        let verdict = classify_fact(&fact, &known, &family, &rho)?;
        let name = serde_json::to_value(candidate).expect("unit variant");
        for s in &verdict.per_set {
            let prob = s.probability.map(|x| x.to_string()).unwrap_or_default();
            csv.row(&[&name.as_str().unwrap_or_default(), &s.set_index, &prob]);
        }
        results.push(FactResult { candidate, status: verdict.status, per_set: verdict.per_set });
    }
    Ok(Outcome::new(&p, &FactsOutput { known: p.known, verdicts: results })?.table("facts.csv", csv))
}
