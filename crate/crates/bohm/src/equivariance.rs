//! Equivariance: a |ψ|²-distributed ensemble stays |ψ|²-distributed under
//! the guidance flow. Checked with the Kolmogorov–Smirnov statistic.

use qmwb_core::measurement::RandomSource;
use serde::{Deserialize, Serialize};

use crate::current::GradientScheme;
use crate::error::{BohmError, Result};
use crate::grid::GridWavefunction;
use crate::output::TrajectoryLog;
use crate::trajectories::{order_violation, TrajectoryEnsemble, TrajectoryOptions, TrajectoryStepper};

/// Asymptotic KS critical values at 95% and 99%, to be divided by √K.
pub const KS_95: f64 = 1.36;
pub const KS_99: f64 = 1.63;
/// Allowance for integration error on top of sampling noise.
pub const KS_SLACK: f64 = 1.5;
pub const MIN_PARTICLES: usize = 1000;

/// Piecewise-linear density through the grid samples of a 1D state, on
/// `[x_0, x_{N-1}]`, with its exact cumulative distribution.
#[derive(Debug, Clone)]
pub struct GridDistribution {
    origin: f64,
    dx: f64,
    rho: Vec<f64>,
    cumulative: Vec<f64>,
}

impl GridDistribution {
    pub fn new(psi: &GridWavefunction) -> Result<Self> {
        if psi.ndim() != 1 {
            return Err(BohmError::Dimension("distribution needs a 1D grid".into()));
        }
        let a = psi.axes()[0];
        let rho = psi.density();
        let mut cumulative = vec![0.0; rho.len()];
        for i in 1..rho.len() {
            cumulative[i] = cumulative[i - 1] + 0.5 * a.dx() * (rho[i - 1] + rho[i]);
        }
        Ok(Self { origin: a.origin(), dx: a.dx(), rho, cumulative })
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().expect("grid has points")
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let last = self.rho.len() - 1;
        let t = (x - self.origin) / self.dx;
        if t <= 0.0 {
            return 0.0;
        }
        if t >= last as f64 {
            return 1.0;
        }
        let i = t.floor() as usize;
        let s = x - (self.origin + i as f64 * self.dx);
        let slope = (self.rho[i + 1] - self.rho[i]) / self.dx;
        (self.cumulative[i] + self.rho[i] * s + 0.5 * slope * s * s) / self.total()
    }

    /// Inverse of `cdf` for `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        let target = u.clamp(0.0, 1.0) * self.total();
        let i = match self.cumulative.partition_point(|c| *c <= target) {
            0 => 0,
            p => (p - 1).min(self.rho.len() - 2),
        };
        let r = target - self.cumulative[i];
        let a = 0.5 * (self.rho[i + 1] - self.rho[i]) / self.dx;
        let b = self.rho[i];
        let disc = (b * b + 4.0 * a * r).max(0.0);
        let denom = b + disc.sqrt();
        let s = if denom > 0.0 { 2.0 * r / denom } else { 0.0 };
        self.origin + (i as f64 + (s / self.dx).clamp(0.0, 1.0)) * self.dx
    }
}

/// `k` positions drawn from `|ψ|²` by inverse-CDF sampling, kept strictly
/// inside the grid.
pub fn sample_positions(psi: &GridWavefunction, k: usize, source: &mut RandomSource) -> Result<Vec<f64>> {
    let dist = GridDistribution::new(psi)?;
    let a = psi.axes()[0];
    let (lo, hi) = (a.origin(), a.coord(a.len() - 1));
    let margin = 1e-9 * a.dx();
    Ok((0..k)
        .map(|_| dist.quantile(source.uniform()).clamp(lo + margin, hi - margin))
        .collect())
}

/// One-sample KS statistic `sup |F_K - F|`.
pub fn ks_statistic(samples: &[f64], dist: &GridDistribution) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let k = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            let f = dist.cdf(*x);
            ((i + 1) as f64 / k - f).max(f - i as f64 / k)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceConfig {
    pub particles: usize,
    pub total_time: f64,
    pub dt: f64,
    pub checkpoints: usize,
    pub gradient: GradientScheme,
    /// Particles whose paths are logged; zero disables logging.
    pub record_particles: usize,
    /// Log every this many steps.
    pub record_stride: usize,
}

impl Default for EquivarianceConfig {
    fn default() -> Self {
        Self {
            particles: 10_000,
            total_time: 1.0,
            dt: 0.005,
            checkpoints: 3,
            gradient: GradientScheme::Spectral,
            record_particles: 0,
            record_stride: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsCheckpoint {
    pub step: usize,
    pub time: f64,
    pub ks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivarianceReport {
    pub particles: usize,
    pub steps: usize,
    pub dt: f64,
    pub initial_ks: f64,
    pub checkpoints: Vec<KsCheckpoint>,
    /// `1.36/√K`.
    pub bound_95: f64,
    /// `1.63/√K`.
    pub bound_99: f64,
    /// `1.5 · 1.63/√K`, the per-checkpoint pass threshold.
    pub threshold: f64,
    pub pass: bool,
    /// Whether every checkpoint is also below `1.5 · 1.36/√K`.
    pub pass_95: bool,
    pub order_preserved: bool,
    /// Largest crossing distance seen at any step; fixed-step integration
    /// can cross trajectories near nodes, where the velocity diverges.
    pub max_order_violation: f64,
    pub norm_drift_per_1000_steps: f64,
}

#[derive(Debug, Clone)]
pub struct EquivarianceRun {
    pub report: EquivarianceReport,
    pub final_psi: GridWavefunction,
    pub final_ensemble: TrajectoryEnsemble,
    pub log: TrajectoryLog,
}

/// Samples `K` particles from `|ψ₀|²`, carries them to `T` and compares the
/// empirical distribution with `|ψ_t|²` at evenly spaced checkpoints.
pub fn equivariance_test(
    psi0: &GridWavefunction,
    source: &mut RandomSource,
    config: &EquivarianceConfig,
) -> Result<EquivarianceRun> {
    if config.particles < MIN_PARTICLES {
        return Err(BohmError::TooFewParticles { needed: MIN_PARTICLES, got: config.particles });
    }
    if !(config.total_time >= 0.0 && config.total_time.is_finite()) {
        return Err(BohmError::InvalidArgument(format!("total time must be non-negative, got {}", config.total_time)));
    }
    if config.checkpoints == 0 {
        return Err(BohmError::InvalidArgument("need at least one checkpoint".into()));
    }
    let psi0 = psi0.normalized();
    let steps = (config.total_time / config.dt).round() as usize;
    let k = config.particles;
    let initial = sample_positions(&psi0, k, source)?;
    let initial_ks = ks_statistic(&initial, &GridDistribution::new(&psi0)?);
    let options = TrajectoryOptions { gradient: config.gradient, coupling: None };
    let mut stepper = TrajectoryStepper::new(psi0.clone(), config.dt, options, 0.0)?;
    let mut ens = TrajectoryEnsemble::new_1d(initial.clone(), 0.0);
    let marks: Vec<usize> = (1..=config.checkpoints).map(|c| (steps * c).div_ceil(config.checkpoints)).collect();
    let mut log = TrajectoryLog::new(1);
    let recorded = config.record_particles.min(k);
    let stride = config.record_stride.max(1);
    log.record(&ens, recorded);
    let mut checkpoints = Vec::new();
    let mut violation: f64 = 0.0;
    for step in 1..=steps.max(*marks.last().unwrap_or(&0)) {
        stepper.step(&mut ens)?;
        violation = violation.max(order_violation(&initial, &ens.coordinate(0)));
        if recorded > 0 && (step % stride == 0 || step == steps) {
            log.record(&ens, recorded);
        }
        if marks.contains(&step) {
            let dist = GridDistribution::new(stepper.psi())?;
            checkpoints.push(KsCheckpoint { step, time: stepper.time(), ks: ks_statistic(&ens.coordinate(0), &dist) });
        }
    }
    if steps == 0 {
        let dist = GridDistribution::new(&psi0)?;
        checkpoints = marks.iter().map(|_| KsCheckpoint { step: 0, time: 0.0, ks: ks_statistic(&initial, &dist) }).collect();
    }
    let root = (k as f64).sqrt();
    let bound_95 = KS_95 / root;
    let bound_99 = KS_99 / root;
    let threshold = KS_SLACK * bound_99;
    let drift = (stepper.psi().norm_sqr() - psi0.norm_sqr()).abs();
    let report = EquivarianceReport {
        particles: k,
        steps,
        dt: config.dt,
        initial_ks,
        pass: checkpoints.iter().all(|c| c.ks < threshold),
        pass_95: checkpoints.iter().all(|c| c.ks < KS_SLACK * bound_95),
        checkpoints,
        bound_95,
        bound_99,
        threshold,
        order_preserved: violation == 0.0,
        max_order_violation: violation,
        norm_drift_per_1000_steps: if steps == 0 { 0.0 } else { drift * 1000.0 / steps as f64 },
    };
    Ok(EquivarianceRun { report, final_psi: stepper.into_psi(), final_ensemble: ens, log })
}
