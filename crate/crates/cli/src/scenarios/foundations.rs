//! Cat, EPR and GHZ scenarios.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qmwb_core::interpretations::{cat_experiment, epr_correlation, CatReport, EprReport};
use qmwb_core::logic::{ghz_refutation, ContradictionReport};
use qmwb_core::measurement::RandomSource;

use super::{require, Context, Csv, Outcome};
use crate::config::parse_params;
use crate::error::Result;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CatParams {
    /// Run one variant only; both when absent.
    include_environment: Option<bool>,
}

#[derive(Serialize)]
struct CatOutput {
    variants: Vec<CatReport>,
    /// Largest marginal difference between the variants, 0 for one variant.
    marginal_difference: f64,
    marginals_agree: bool,
}

pub(super) fn cat(params: &Value, ctx: &Context) -> Result<Outcome> {
    let p: CatParams = parse_params(params)?;
    let flags = match p.include_environment {
        Some(flag) => vec![flag],
        None => vec![false, true],
    };
    let variants = flags.into_iter().map(cat_experiment).collect::<qmwb_core::Result<Vec<_>>>()?;
    let marginal_difference = variants
        .iter()
        .flat_map(|a| variants.iter().map(move |b| (a.marginal_up - b.marginal_up).abs().max((a.marginal_down - b.marginal_down).abs())))
        .fold(0.0, f64::max);
    let mut csv = Csv::new(&["include_environment", "bell_state", "probability", "collapse_at_cat"]);
    for v in &variants {
        for k in 0..4 {
            csv.row(&[&v.include_environment, &k, &v.bell_probabilities[k], &v.collapse_at_cat[k]]);
        }
    }
    let out = CatOutput { marginals_agree: marginal_difference < ctx.tolerances.verdict, variants, marginal_difference };
    Ok(Outcome::new(&p, &out)?.table("cat_bell.csv", csv))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EprParams {
    runs: usize,
    wing_b_first: bool,
}

impl Default for EprParams {
    fn default() -> Self {
        Self { runs: 1000, wing_b_first: false }
    }
}

#[derive(Serialize)]
struct EprOutput {
    #[serde(flatten)]
    report: EprReport,
    all_anticorrelated: bool,
}

pub(super) fn epr(params: &Value, ctx: &Context) -> Result<Outcome> {
    let p: EprParams = parse_params(params)?;
    require(p.runs >= 1, "runs", "must be at least 1")?;
    let mut source = RandomSource::new(ctx.seed);
    let report = epr_correlation(p.runs, &mut source, p.wing_b_first)?;
    let out = EprOutput { all_anticorrelated: report.all_anticorrelated(), report };
    Outcome::new(&p, &out)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Serialize)]
struct GhzOutput {
    #[serde(flatten)]
    report: ContradictionReport,
    refutes: bool,
}

pub(super) fn ghz(params: &Value, _ctx: &Context) -> Result<Outcome> {
    let p: NoParams = parse_params(params)?;
    let report = ghz_refutation();
    let mut csv = Csv::new(&["operator", "expected_eigenvalue", "residual"]);
    for c in &report.state_eigenvalue_checks {
        csv.row(&[&c.operator, &c.expected, &c.residual]);
    }
    let out = GhzOutput { refutes: report.refutes(), report };
    Ok(Outcome::new(&p, &out)?.table("ghz_eigenvalues.csv", csv))
}
