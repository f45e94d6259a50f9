//! Decoherence functional checks on a chosen alternative-history set.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qmwb_core::histories::{
    all_partitions, classify_consistency, coarse_grain, decoherence_matrix, decoherent_demo, interference_demo,
    records_check, sum_rule_violation, AlternativeSet, AlternativeSetDoc, Consistency, ConsistencyReport,
    DecoherenceMatrix,
};
use qmwb_core::interpretations::{total_variation, HistorySampler};
use qmwb_core::measurement::RandomSource;
use qmwb_core::{DensityMatrix, StateVector, C64};

use super::{require, Context, Csv, Outcome};
use crate::config::parse_params;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SetChoice {
    Interference,
    Decoherent,
    Custom,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct HistoriesParams {
    set: SetChoice,
    /// Required when `set` is `custom`.
    custom_set: Option<AlternativeSetDoc>,
    /// Pure initial state as `[re, im]` amplitudes; required for `custom`,
    /// replaces the built-in state otherwise.
    initial_state: Option<Vec<[f64; 2]>>,
    sample: bool,
    samples: usize,
    /// Coarse-grainings evaluated explicitly; beyond this an even stride is used.
    max_coarse_grainings: usize,
}

impl Default for HistoriesParams {
    fn default() -> Self {
        Self {
            set: SetChoice::Interference,
            custom_set: None,
            initial_state: None,
            sample: false,
            samples: 100_000,
            max_coarse_grainings: 2000,
        }
    }
}

/// Sum-rule check over coarse-grainings of every slot at once.
#[derive(Debug, Clone, Serialize)]
pub struct SumRuleSurvey {
    /// Product of the per-slot Bell numbers.
    pub total_coarse_grainings: u128,
    pub checked: usize,
    pub exhaustive: bool,
    pub max_violation: f64,
    /// Per-slot partitions attaining `max_violation`.
    pub worst: Vec<Vec<Vec<usize>>>,
    /// `Σ |D(α, α')|` over distinct pairs; bounds the violation of any coarse-graining.
    pub off_diagonal_sum: f64,
    pub tolerance: f64,
    /// Checked exhaustively, or bounded by `off_diagonal_sum`.
    pub every_coarse_graining_within: bool,
}

/// Evaluate the sum rule on up to `cap` coarse-grainings, evenly spaced in
/// mixed-radix order over the product of per-slot partitions.
pub fn sum_rule_survey(
    set: &AlternativeSet,
    rho: &DensityMatrix,
    d: &DecoherenceMatrix,
    cap: usize,
    tolerance: f64,
) -> qmwb_core::Result<SumRuleSurvey> {
    let per_slot: Vec<Vec<Vec<Vec<usize>>>> = set.slot_sizes().into_iter().map(all_partitions).collect();
    let total: u128 = per_slot.iter().map(|p| p.len() as u128).product();
    let exhaustive = total <= cap as u128;
    let count = if exhaustive { total as usize } else { cap };
    let mut max_violation: f64 = 0.0;
    let mut worst = Vec::new();
    for i in 0..count {
        let mut index = if exhaustive { i as u128 } else { i as u128 * total / count as u128 };
        let mut choice = Vec::with_capacity(per_slot.len());
        for parts in &per_slot {
            let radix = parts.len() as u128;
            choice.push(parts[(index % radix) as usize].clone());
            index /= radix;
        }
        let cg = coarse_grain(set, &choice)?;
        let v = sum_rule_violation(set, &cg, rho)?;
        if v > max_violation || worst.is_empty() {
            max_violation = max_violation.max(v);
            worst = choice;
        }
    }
    let n = d.histories.len();
    let mut off_diagonal_sum = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                off_diagonal_sum += d.entries[(a, b)].norm();
            }
        }
    }
    let every_coarse_graining_within =
        max_violation <= tolerance && (exhaustive || off_diagonal_sum <= tolerance);
    Ok(SumRuleSurvey {
        total_coarse_grainings: total,
        checked: count,
        exhaustive,
        max_violation,
        worst,
        off_diagonal_sum,
        tolerance,
        every_coarse_graining_within,
    })
}

#[derive(Serialize)]
struct HistoryRow {
    history: Vec<usize>,
    probability: f64,
}

#[derive(Serialize)]
struct RecordsSummary {
    orthogonal: bool,
    max_overlap: f64,
    tolerance: f64,
    agrees_with_medium: bool,
}

#[derive(Serialize)]
struct SamplerSummary {
    samples: usize,
    counts: Vec<usize>,
    total_variation: f64,
}

#[derive(Serialize)]
struct HistoriesOutput {
    set: SetChoice,
    dim: usize,
    times: Vec<f64>,
    slot_sizes: Vec<usize>,
    histories: Vec<HistoryRow>,
    hermiticity_error: f64,
    diagonal_sum: f64,
    consistency: ConsistencyReport,
    /// Present when the initial state is pure.
    records: Option<RecordsSummary>,
    sum_rule: SumRuleSurvey,
    sampler: Option<SamplerSummary>,
}

/// `ρ = |ψ⟩⟨ψ|` recovered from its largest column, if `ρ` is pure.
fn pure_ket(rho: &DensityMatrix) -> Option<StateVector> {
    let m = rho.matrix();
    let purity = (m * m).trace().re;
    if (purity - 1.0).abs() > 1e-10 {
        return None;
    }
    let column = (0..m.ncols())
        .map(|k| m.column(k).into_owned())
        .max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))?;
    StateVector::from_vector(column).ok().map(|s| s.normalized())
}

fn build(p: &HistoriesParams) -> Result<(AlternativeSet, DensityMatrix)> {
    let (set, rho) = match p.set {
        SetChoice::Interference => interference_demo(),
        SetChoice::Decoherent => decoherent_demo(),
        SetChoice::Custom => {
            let doc = p.custom_set.as_ref().ok_or_else(|| {
                CliError::Validation("params.custom_set: required when set is \"custom\"".into())
            })?;
            require(p.initial_state.is_some(), "initial_state", "required when set is \"custom\"")?;
            let set = AlternativeSet::from_document(doc).map_err(CliError::field("params.custom_set"))?;
            (set, DensityMatrix::maximally_mixed(doc.hamiltonian.len().max(1)))
        }
    };
    if p.set != SetChoice::Custom {
        require(p.custom_set.is_none(), "custom_set", "only allowed when set is \"custom\"")?;
    }
    let rho = match &p.initial_state {
        None => rho,
        Some(amps) => {
            let psi = StateVector::new(amps.iter().map(|&[re, im]| C64::new(re, im)).collect())
                .map_err(CliError::field("params.initial_state"))?;
            require(psi.dim() == set.dim(), "initial_state", format!("needs {} amplitudes", set.dim()))?;
            require(psi.norm_sqr() > 0.0, "initial_state", "zero vector")?;
            DensityMatrix::pure(&psi)
        }
    };
    Ok((set, rho))
}

pub(super) fn histories_check(params: &Value, ctx: &Context) -> Result<Outcome> {
    let p: HistoriesParams = parse_params(params)?;
    require(p.max_coarse_grainings >= 1, "max_coarse_grainings", "must be at least 1")?;
    require(!p.sample || p.samples >= 1, "samples", "must be at least 1")?;
    let (set, rho) = build(&p)?;

    let d = decoherence_matrix(&set, &rho)?;
    let consistency = classify_consistency(&d, ctx.tolerances.consistency);
    let records = match pure_ket(&rho) {
        Some(psi) => {
            let r = records_check(&set, &psi)?;
            Some(RecordsSummary {
                agrees_with_medium: r.orthogonal == (consistency.class == Consistency::Medium),
                orthogonal: r.orthogonal,
                max_overlap: r.max_overlap,
                tolerance: r.tolerance,
            })
        }
        None => None,
    };
    let sum_rule = sum_rule_survey(&set, &rho, &d, p.max_coarse_grainings, ctx.tolerances.sum_rule)?;

    let mut sampled = None;
    if p.sample {
        if consistency.class != Consistency::Medium {
            return Err(CliError::Engine(format!(
                "sampler refused: set is {:?} (max off-diagonal |D| = {})",
                consistency.class, consistency.max_violation
            )));
        }
        let sampler = HistorySampler::new(&set, &rho)?;
        let mut source = RandomSource::new(ctx.seed);
        let counts = sampler.counts(p.samples, &mut source);
        sampled = Some(SamplerSummary {
            samples: p.samples,
            total_variation: total_variation(&counts, sampler.weights()),
            counts,
        });
    }

    let probs = d.diagonal();
    let mut hist_csv = Csv::new(&["history", "probability", "sampled_frequency"]);
    for (i, (h, pr)) in d.histories.iter().zip(&probs).enumerate() {
        let label = h.indices.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("-");
        let freq = sampled.as_ref().map(|s| (s.counts[i] as f64 / s.samples as f64).to_string()).unwrap_or_default();
        hist_csv.row(&[&label, pr, &freq]);
    }
    let mut d_csv = Csv::new(&["row", "col", "re", "im"]);
    for a in 0..d.histories.len() {
        for b in 0..d.histories.len() {
            let z = d.entries[(a, b)];
            d_csv.row(&[&a, &b, &z.re, &z.im]);
        }
    }

    let out = HistoriesOutput {
        set: p.set,
        dim: set.dim(),
        times: set.times().to_vec(),
        slot_sizes: set.slot_sizes(),
        histories: d.histories.iter().zip(&probs).map(|(h, &probability)| HistoryRow { history: h.indices.clone(), probability }).collect(),
        hermiticity_error: d.hermiticity_error(),
        diagonal_sum: d.diagonal_sum(),
        consistency,
        records,
        sum_rule,
        sampler: sampled,
    };
    Ok(Outcome::new(&p, &out)?.table("history_probabilities.csv", hist_csv).table("decoherence_matrix.csv", d_csv))
}
