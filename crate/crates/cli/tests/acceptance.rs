//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use qmwb_bohm::current::continuity_refinement;
use qmwb_bohm::demos;
use qmwb_bohm::equivariance_test;
use qmwb_bohm::grid::{Axis, GridWavefunction};
use qmwb_bohm::measure::{momentum_measurement_probe, position_measurement_model, MomentumProbeConfig, PositionMeasurementConfig};
use qmwb_scenarios::scenarios::sum_rule_survey;
use qmwb_core::dynamics::{picture_equivalence_check, EvolutionSpec};
use qmwb_core::histories::{
    classify_consistency, decoherence_matrix, interference_demo, random_commuting_set, random_generic_set,
    records_check, Consistency,
};
use qmwb_core::interpretations::{
    cat_experiment, diagonal_minds_scenario, frequency_measure, interference_minds_scenario,
    many_minds_consistency_probe, HistorySampler,
};
use qmwb_core::logic::{additivity_probe, ghz_refutation};
use qmwb_core::measurement::RandomSource;
use qmwb_core::random::{random_density, random_hermitian, random_ket, rng};
use qmwb_core::{spin, DensityMatrix, OutcomeSet, Projector};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn ghz() -> Verdict {
    let start = Instant::now();
    let r = ghz_refutation();
    let xxx = r.state_eigenvalue_checks.iter().find(|c| c.operator == "x1 x2 x3");
    let pass = r.commutator_norms.iter().all(|&n| n < 1e-12)
        && r.product_identity_error < 1e-12
        && xxx.is_some_and(|c| c.expected == -1.0 && c.residual < 1e-10)
        && r.state_eigenvalue_checks.iter().all(|c| c.residual < 1e-10)
        && r.satisfying_assignment_count == 0
        && start.elapsed() < Duration::from_secs(1);
    verdict(
        pass,
        format!(
            "commutators {:?}, product error {:e}, x1x2x3 residual {:e}, satisfying assignments {}",
            r.commutator_norms,
            r.product_identity_error,
            xxx.map_or(f64::NAN, |c| c.residual),
            r.satisfying_assignment_count
        ),
    )
}

fn cat() -> Verdict {
    let (bare, env) = match (cat_experiment(false), cat_experiment(true)) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => return verdict(false, format!("engine error: {:?} {:?}", a.err(), b.err())),
    };
    let bare_ok = bare.bell_probabilities.iter().zip([1.0, 0.0, 0.0, 0.0]).all(|(&p, w)| close(p, w, 1e-10));
    let env_ok = env.bell_probabilities.iter().zip([0.5, 0.5, 0.0, 0.0]).all(|(&p, w)| close(p, w, 1e-10));
    let marginals = close(bare.marginal_up, env.marginal_up, 1e-10) && close(bare.marginal_down, env.marginal_down, 1e-10);
    verdict(
        bare_ok && env_ok && marginals,
        format!("bare {:?}, environment {:?}", bare.bell_probabilities, env.bell_probabilities),
    )
}

fn additivity() -> Verdict {
    let rho = DensityMatrix::pure(&spin::z_up());
    let p = Projector::onto_state(&spin::z_up());
    let q = Projector::onto_state(&spin::x_up());
    match additivity_probe(&rho, &p, &q) {
        Ok(r) => {
            let violation = r.mu_p + r.mu_q - r.mu_join;
            verdict(
                close(r.mu_p, 1.0, 1e-10) && close(r.mu_q, 0.5, 1e-10) && close(r.mu_join, 1.0, 1e-10) && close(violation, 0.5, 1e-10) && !r.additive,
                format!("mu = ({}, {}), join {}, violation {violation}", r.mu_p, r.mu_q, r.mu_join),
            )
        }
        Err(e) => verdict(false, format!("engine error: {e}")),
    }
}

/// Random medium sets shared by the sum-rule and functional-structure checks.
fn medium_sets() -> Vec<(qmwb_core::histories::AlternativeSet, DensityMatrix)> {
    let mut r = rng(4040);
    (0..50)
        .map(|_| {
            let dim = r.random_range(2..=8);
            let slots = r.random_range(1..=3);
            (random_commuting_set(&mut r, dim, slots), random_density(&mut r, dim))
        })
        .collect()
}

fn sum_rule() -> Verdict {
    let start = Instant::now();
    let mut checked = 0;
    let mut exhaustive = 0;
    let mut worst: f64 = 0.0;
    let mut bound: f64 = 0.0;
    for (set, rho) in medium_sets() {
        let Ok(d) = decoherence_matrix(&set, &rho) else { return verdict(false, "decoherence matrix failed") };
        if classify_consistency(&d, None).class != Consistency::Medium {
            return verdict(false, "generated set is not medium decoherent");
        }
        let Ok(s) = sum_rule_survey(&set, &rho, &d, 300, 1e-8) else { return verdict(false, "coarse-graining failed") };
        if !s.every_coarse_graining_within {
            return verdict(false, format!("sum rule violated: {} (bound {})", s.max_violation, s.off_diagonal_sum));
        }
        checked += s.checked;
        exhaustive += s.exhaustive as usize;
        worst = worst.max(s.max_violation);
        bound = bound.max(s.off_diagonal_sum);
    }
    let (set, rho) = interference_demo();
    let Ok(d) = decoherence_matrix(&set, &rho) else { return verdict(false, "interference matrix failed") };
    let c = classify_consistency(&d, None);
    let refused = HistorySampler::new(&set, &rho).is_err();
    let elapsed = start.elapsed();
    verdict(
        c.class == Consistency::Inconsistent && close(c.max_violation, 0.25, 1e-12) && refused && elapsed < Duration::from_secs(30),
        format!(
            "{checked} coarse-grainings evaluated ({exhaustive}/50 sets exhaustively), max violation {worst:e}, \
             max off-diagonal bound {bound:e}; interference set {:?} with |D| = {}, sampler refused: {refused}",
            c.class, c.max_violation
        ),
    )
}

fn functional_structure() -> Verdict {
    let mut herm: f64 = 0.0;
    let mut diag: f64 = 0.0;
    let mut check = |set: &qmwb_core::histories::AlternativeSet, rho: &DensityMatrix| {
        let d = decoherence_matrix(set, rho).expect("valid set");
        herm = herm.max(d.hermiticity_error());
        diag = diag.max((d.diagonal_sum() - 1.0).abs());
        d
    };
    for (set, rho) in medium_sets() {
        check(&set, &rho);
    }
    let mut r = rng(5050);
    let mut agree = 0;
    let mut medium = 0;
    for i in 0..100 {
        let dim = r.random_range(2..=6);
        let slots = r.random_range(1..=3);
        let set = if i % 2 == 0 { random_commuting_set(&mut r, dim, slots) } else { random_generic_set(&mut r, dim, slots) };
        let psi = random_ket(&mut r, dim);
        let d = check(&set, &DensityMatrix::pure(&psi));
        let is_medium = classify_consistency(&d, None).class == Consistency::Medium;
        let orthogonal = records_check(&set, &psi).expect("valid set").orthogonal;
        medium += is_medium as usize;
        agree += (is_medium == orthogonal) as usize;
    }
    verdict(
        herm < 1e-10 && diag < 1e-9 && agree == 100,
        format!("hermiticity {herm:e}, diagonal sum error {diag:e}, records agree {agree}/100 ({medium} medium)"),
    )
}

fn pictures() -> Verdict {
    let mut r = rng(6060);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let dim = r.random_range(2..=6);
        let h = random_hermitian(&mut r, dim);
        let a = random_hermitian(&mut r, dim);
        let psi = random_ket(&mut r, dim);
        let t = r.random_range(0.0..5.0);
        let spec = EvolutionSpec::natural(h, t);
        // Ω covers a contiguous run of eigenvalues, bounded at midpoints
        let eig = a.spectrum();
        let i = r.random_range(0..dim);
        let j = r.random_range(i..dim);
        let lo = if i == 0 { eig[0] - 1.0 } else { 0.5 * (eig[i - 1] + eig[i]) };
        let hi = if j + 1 == dim { eig[dim - 1] + 1.0 } else { 0.5 * (eig[j] + eig[j + 1]) };
        match picture_equivalence_check(&spec, &psi, &a, &OutcomeSet::closed(lo, hi)) {
            Ok((s, h)) => worst = worst.max((s - h).abs()),
            Err(e) => return verdict(false, format!("engine error: {e}")),
        }
    }
    verdict(worst < 1e-10, format!("max |p_S - p_H| = {worst:e} over 100 instances"))
}

fn frequency() -> Verdict {
    let m20 = frequency_measure(20, 0.5, 0.15);
    let m12 = frequency_measure(12, 0.5, 0.15);
    verdict(m20 > 0.95, format!("measure within 0.15 of 0.5: n = 20 gives {m20}, n = 12 gives {m12}; required > 0.95 at n = 20"))
}

fn minds() -> Verdict {
    let (Ok(i), Ok(d)) = (
        many_minds_consistency_probe(&interference_minds_scenario()),
        many_minds_consistency_probe(&diagonal_minds_scenario()),
    ) else {
        return verdict(false, "engine error");
    };
    let stochastic = [&i, &d].iter().all(|r| r.max_row_sum_error < 1e-9 && r.min_entry >= -1e-12);
    verdict(
        stochastic && i.discrepancy > 0.05 && d.discrepancy == 0.0,
        format!("row sums within {:e}, discrepancy interference {}, diagonal {}", i.max_row_sum_error.max(d.max_row_sum_error), i.discrepancy, d.discrepancy),
    )
}

fn equivariance() -> Verdict {
    let start = Instant::now();
    let Ok((psi, config)) = demos::free_gaussian() else { return verdict(false, "demo failed") };
    let run = match equivariance_test(&psi, &mut RandomSource::new(2024), &config) {
        Ok(run) => run,
        Err(e) => return verdict(false, format!("engine error: {e}")),
    };
    let study = continuity_refinement(
        |n| GridWavefunction::gaussian_1d(Axis::spanning(n, -20.0, 20.0)?, 0.0, 1.0, 2.0, 1.0, 1.0),
        &[64, 128, 256, 512, 1024],
        1e-4,
    );
    let Ok(study) = study else { return verdict(false, "refinement failed") };
    let r = &run.report;
    let bound = 1.5 * r.bound_95;
    let ks: Vec<f64> = r.checkpoints.iter().map(|c| c.ks).collect();
    let elapsed = start.elapsed();
    verdict(
        psi.len() == 1024
            && r.particles == 10_000
            && ks.len() == 3
            && ks.iter().all(|&k| k < bound)
            && r.norm_drift_per_1000_steps < 1e-10
            && study.slope >= 1.8
            && elapsed < Duration::from_secs(120),
        format!(
            "KS {ks:?} < {bound}, norm drift {:e} per 1000 steps, continuity slope {:.3}",
            r.norm_drift_per_1000_steps, study.slope
        ),
    )
}

fn measurement() -> Verdict {
    let pos = match position_measurement_model(&PositionMeasurementConfig::two_packet(), &mut RandomSource::new(5)) {
        Ok(run) => run.report,
        Err(e) => return verdict(false, format!("engine error: {e}")),
    };
    let mom = match momentum_measurement_probe(&MomentumProbeConfig::standard(), &mut RandomSource::new(5)) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("engine error: {e}")),
    };
    verdict(
        pos.branch_overlap < 1e-6 && pos.trajectories.len() == 100 && pos.landed_within == 100 && mom.variance_ratio > 10.0,
        format!(
            "branch overlap {:e}, landed within 3 sigma {}/{}, momentum variance ratio {:.1}",
            pos.branch_overlap,
            pos.landed_within,
            pos.trajectories.len(),
            mom.variance_ratio
        ),
    )
}

fn shipped_configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map(|it| it.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "json")).collect())
        .unwrap_or_default();
    files.sort();
    files
}

/// Every file of a run directory, with the report's timestamp line removed.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .expect("run directory")
        .map(|e| {
            let p = e.expect("entry").path();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let mut bytes = std::fs::read(&p).expect("readable output");
            if name == "report.json" {
                let text = String::from_utf8(bytes).expect("UTF-8 report");
                bytes = text.lines().filter(|l| !l.trim_start().starts_with("\"timestamp\"")).collect::<Vec<_>>().join("\n").into_bytes();
            }
            (name, bytes)
        })
        .collect();
    out.sort();
    out
}

fn determinism() -> Verdict {
    let configs = shipped_configs();
    if configs.is_empty() {
        return verdict(false, "no shipped configs found");
    }
    let tmp = tempfile::tempdir().expect("temp dir");
    let mut mismatched = Vec::new();
    for cfg in &configs {
        let stem = cfg.file_stem().unwrap().to_string_lossy().into_owned();
        let mut runs = Vec::new();
        for k in 0..2 {
            let out = tmp.path().join(format!("{stem}-{k}"));
            let status = Command::new(env!("CARGO_BIN_EXE_qmwb")).arg("run").arg(cfg).arg("--out").arg(&out).output();
            match status {
                Ok(o) if o.status.success() => runs.push(snapshot(&out)),
                Ok(o) => return verdict(false, format!("{stem}: exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr))),
                Err(e) => return verdict(false, format!("cannot launch binary: {e}")),
            }
        }
        if runs[0] != runs[1] {
            mismatched.push(stem);
        }
    }
    verdict(
        mismatched.is_empty(),
        format!("{} configs run twice, mismatched: {:?}", configs.len(), mismatched),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("GHZ contradiction", ghz),
        ("cat/decoherence discrimination", cat),
        ("quantum-logic additivity failure", additivity),
        ("histories sum rule", sum_rule),
        ("decoherence-functional structure", functional_structure),
        ("picture equivalence", pictures),
        ("many-worlds frequency theorem", frequency),
        ("many-minds consistency", minds),
        ("Bohmian equivariance", equivariance),
        ("Bohmian measurement", measurement),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        failed += !v.pass as usize;
        println!("{status} {:>2} {name} ({:.2}s): {}", i + 1, start.elapsed().as_secs_f64(), v.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
