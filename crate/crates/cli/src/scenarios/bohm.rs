//! Grid wavefunction scenarios: evolution, trajectories and measurement.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qmwb_bohm::current::{continuity_refinement, GradientScheme, RefinementStudy};
use qmwb_bohm::demos;
use qmwb_bohm::equivariance::{equivariance_test, EquivarianceConfig, EquivarianceReport};
use qmwb_bohm::evolve::{energy_expectation, SplitStepPropagator};
use qmwb_bohm::grid::{free_gaussian_width, Axis, GridWavefunction};
use qmwb_bohm::measure::{
    momentum_measurement_probe, position_measurement_model, AxisSpec, MomentumProbeConfig, MomentumProbeReport,
    PositionMeasurementConfig, PositionMeasurementReport,
};
use qmwb_bohm::output::write_density_csv;
use qmwb_core::measurement::RandomSource;

use super::{require, Context, Csv, Outcome};
use crate::config::parse_params;
use crate::error::{CliError, Result};

/// Grid points from each edge counted as edge mass.
const EDGE_MARGIN: usize = 16;

fn density_csv(psi: &GridWavefunction) -> Csv {
    let mut buf = Vec::new();
    write_density_csv(&mut buf, psi, GradientScheme::Central).expect("writing to memory");
    Csv::from_bytes(buf)
}

fn step_count(total_time: f64, dt: f64) -> Result<usize> {
    require(dt > 0.0 && dt.is_finite(), "dt", "must be positive")?;
    require(total_time > 0.0 && total_time.is_finite(), "total_time", "must be positive")?;
    Ok((total_time / dt).round().max(1.0) as usize)
}

// ---------------------------------------------------------------- evolve

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Potential {
    Free,
    Harmonic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EvolveParams {
    potential: Potential,
    /// Angular frequency of `V = m ω² x² / 2`.
    omega: f64,
    grid: AxisSpec,
    center: f64,
    /// Initial density standard deviation.
    sigma: f64,
    k0: f64,
    mass: f64,
    hbar: f64,
    total_time: f64,
    dt: f64,
    /// Density snapshots after the initial one, evenly spaced in steps.
    snapshots: usize,
    /// Grid sizes of the continuity refinement study; empty disables it.
    continuity_sizes: Vec<usize>,
    /// The study uses `[center - w, center + w)`.
    continuity_half_width: f64,
}

impl Default for EvolveParams {
    fn default() -> Self {
        Self {
            potential: Potential::Free,
            omega: 1.0,
            grid: AxisSpec { points: 1024, start: -40.0, end: 40.0 },
            center: -3.0,
            sigma: 1.0,
            k0: 1.0,
            mass: 1.0,
            hbar: 1.0,
            total_time: 2.0 * 3f64.sqrt(),
            dt: 0.005,
            snapshots: 4,
            continuity_sizes: vec![64, 128, 256, 512, 1024],
            continuity_half_width: 20.0,
        }
    }
}

impl EvolveParams {
    /// Closed-form `(⟨x⟩, width)` of the unchirped Gaussian at time `t`.
    fn oracle(&self, t: f64) -> (f64, f64) {
        let v0 = self.hbar * self.k0 / self.mass;
        match self.potential {
            Potential::Free => (self.center + v0 * t, free_gaussian_width(self.sigma, t, self.mass, self.hbar)),
            Potential::Harmonic => {
                let (s, c) = (self.omega * t).sin_cos();
                let sigma_p = self.hbar / (2.0 * self.sigma * self.mass * self.omega);
                let mean = self.center * c + v0 / self.omega * s;
                (mean, (self.sigma * self.sigma * c * c + sigma_p * sigma_p * s * s).sqrt())
            }
        }
    }

    fn initial(&self, axis: Axis) -> Result<GridWavefunction> {
        let psi = GridWavefunction::gaussian_1d(axis, self.center, self.sigma, self.k0, self.mass, self.hbar)
            .map_err(CliError::field("params"))?;
        match self.potential {
            Potential::Free => Ok(psi),
            Potential::Harmonic => {
                let k = 0.5 * self.mass * self.omega * self.omega;
                let v = axis.coords().iter().map(|x| k * x * x).collect();
                psi.with_potential(v).map_err(CliError::field("params.omega"))
            }
        }
    }
}

#[derive(Serialize)]
struct Snapshot {
    step: usize,
    time: f64,
    norm: f64,
    mean: f64,
    width: f64,
    oracle_mean: f64,
    oracle_width: f64,
    energy: f64,
    file: String,
}

#[derive(Serialize)]
struct EvolveOutput {
    steps: usize,
    snapshots: Vec<Snapshot>,
    max_mean_error: f64,
    max_relative_width_error: f64,
    norm_drift_per_1000_steps: f64,
    relative_energy_drift: f64,
    final_edge_mass: f64,
    continuity: Option<RefinementStudy>,
}

pub(super) fn evolve(params: &Value, _ctx: &Context) -> Result<Outcome> {
    let p: EvolveParams = parse_params(params)?;
    let axis = p.grid.axis().map_err(CliError::field("params.grid"))?;
    for (name, v) in [("sigma", p.sigma), ("mass", p.mass), ("hbar", p.hbar), ("omega", p.omega)] {
        require(v > 0.0 && v.is_finite(), name, "must be positive")?;
    }
    require(p.continuity_half_width > 0.0, "continuity_half_width", "must be positive")?;
    require(p.continuity_sizes.is_empty() || p.continuity_sizes.len() >= 2, "continuity_sizes", "need at least two grids")?;
    let steps = step_count(p.total_time, p.dt)?;
    require(p.snapshots >= 1, "snapshots", "must be at least 1")?;
    let marks: Vec<usize> = (1..=p.snapshots).map(|k| k * steps / p.snapshots).collect();

    let mut psi = p.initial(axis)?;
    let prop = SplitStepPropagator::new(&psi, p.dt)?;
    let norm0 = psi.norm_sqr();
    let energy0 = energy_expectation(&psi);
    let mut out = Outcome::new(&p, &())?;
    let mut snapshots = Vec::new();
    let mut record = |step: usize, psi: &GridWavefunction, out: &mut Outcome| {
        let time = step as f64 * p.dt;
        let (oracle_mean, oracle_width) = p.oracle(time);
        let file = format!("density_{:03}.csv", snapshots.len());
        out.tables.push((file.clone(), density_csv(psi).finish()));
        snapshots.push(Snapshot {
            step,
            time,
            norm: psi.norm_sqr(),
            mean: psi.mean(0),
            width: psi.variance(0).sqrt(),
            oracle_mean,
            oracle_width,
            energy: energy_expectation(psi),
            file,
        });
    };
    record(0, &psi, &mut out);
    for step in 1..=steps {
        prop.step(&mut psi);
        if marks.binary_search(&step).is_ok() {
            record(step, &psi, &mut out);
        }
    }

    let continuity = if p.continuity_sizes.is_empty() {
        None
    } else {
        let (c, w) = (p.center, p.continuity_half_width);
        Some(continuity_refinement(
            |n| {
                let a = Axis::spanning(n, c - w, c + w)?;
                GridWavefunction::gaussian_1d(a, p.center, p.sigma, p.k0, p.mass, p.hbar)
            },
            &p.continuity_sizes,
            1e-4,
        )?)
    };

    let report = EvolveOutput {
        steps,
        max_mean_error: snapshots.iter().map(|s| (s.mean - s.oracle_mean).abs()).fold(0.0, f64::max),
        max_relative_width_error: snapshots.iter().map(|s| (s.width / s.oracle_width - 1.0).abs()).fold(0.0, f64::max),
        norm_drift_per_1000_steps: (psi.norm_sqr() - norm0).abs() / steps as f64 * 1000.0,
        relative_energy_drift: (energy_expectation(&psi) - energy0).abs() / energy0.abs().max(f64::MIN_POSITIVE),
        final_edge_mass: psi.edge_mass(EDGE_MARGIN),
        snapshots,
        continuity,
    };
    out.report = super::to_value(&report)?;
    Ok(out)
}

// ---------------------------------------------------------- trajectories

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Demo {
    FreeGaussian,
    TwoGaussians,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct TrajectoryParams {
    demo: Demo,
    particles: usize,
    /// Demo default when absent.
    total_time: Option<f64>,
    dt: Option<f64>,
    checkpoints: usize,
    gradient: GradientScheme,
    record_particles: usize,
    record_stride: usize,
}

impl Default for TrajectoryParams {
    fn default() -> Self {
        let d = EquivarianceConfig::default();
        Self {
            demo: Demo::FreeGaussian,
            particles: d.particles,
            total_time: None,
            dt: None,
            checkpoints: d.checkpoints,
            gradient: d.gradient,
            record_particles: 50,
            record_stride: 10,
        }
    }
}

#[derive(Serialize)]
struct TrajectoryOutput {
    demo: Demo,
    total_time: f64,
    #[serde(flatten)]
    report: EquivarianceReport,
}

pub(super) fn trajectories(params: &Value, ctx: &Context) -> Result<Outcome> {
    let mut p: TrajectoryParams = parse_params(params)?;
    require(p.checkpoints >= 1, "checkpoints", "must be at least 1")?;
    require(p.record_stride >= 1, "record_stride", "must be at least 1")?;
    require(p.record_particles <= p.particles, "record_particles", "cannot exceed particles")?;
    let (psi, base) = match p.demo {
        Demo::FreeGaussian => demos::free_gaussian()?,
        Demo::TwoGaussians => demos::two_gaussians()?,
    };
    let total_time = *p.total_time.get_or_insert(base.total_time);
    let dt = *p.dt.get_or_insert(base.dt);
    step_count(total_time, dt)?;
    let config = EquivarianceConfig {
        particles: p.particles,
        total_time,
        dt,
        checkpoints: p.checkpoints,
        gradient: p.gradient,
        record_particles: p.record_particles,
        record_stride: p.record_stride,
    };
    let mut source = RandomSource::new(ctx.seed);
    let run = equivariance_test(&psi, &mut source, &config)?;
    let mut log = Vec::new();
    run.log.write_csv(&mut log).expect("writing to memory");
    let out = TrajectoryOutput { demo: p.demo, total_time, report: run.report };
    Ok(Outcome::new(&p, &out)?
        .table("trajectories.csv", Csv::from_bytes(log))
        .table("density.csv", density_csv(&run.final_psi)))
}

// --------------------------------------------------------------- measure

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Position,
    Momentum,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureParams {
    #[serde(default = "both")]
    mode: Mode,
    /// Full position-model configuration; the two-packet model when absent.
    #[serde(default = "PositionMeasurementConfig::two_packet")]
    position: PositionMeasurementConfig,
    /// Full momentum-probe configuration; the standard probe when absent.
    #[serde(default = "MomentumProbeConfig::standard")]
    momentum: MomentumProbeConfig,
}

fn both() -> Mode {
    Mode::Both
}

#[derive(Serialize)]
struct MeasureOutput {
    position: Option<PositionMeasurementReport>,
    momentum: Option<MomentumProbeReport>,
}

pub(super) fn measure(params: &Value, ctx: &Context) -> Result<Outcome> {
    let p: MeasureParams = parse_params(params)?;
    let mut tables = Vec::new();
    let mut report = MeasureOutput { position: None, momentum: None };
    if matches!(p.mode, Mode::Position | Mode::Both) {
        let mut source = RandomSource::new(ctx.seed);
        let run = position_measurement_model(&p.position, &mut source)?;
        let mut log = Vec::new();
        run.log.write_csv(&mut log).expect("writing to memory");
        tables.push(("pointer_trajectories.csv".to_string(), Csv::from_bytes(log)));
        tables.push(("position_density.csv".to_string(), density_csv(&run.final_psi)));
        report.position = Some(run.report);
    }
    if matches!(p.mode, Mode::Momentum | Mode::Both) {
        let mut source = RandomSource::new(ctx.seed);
        let r = momentum_measurement_probe(&p.momentum, &mut source)?;
        let mut csv = Csv::new(&["t", "control_mean", "control_variance", "superposition_mean", "superposition_variance"]);
        let (c, s) = (&r.control, &r.superposition);
        for i in 0..c.times.len().min(s.times.len()) {
            csv.row(&[&c.times[i], &c.velocity_mean[i], &c.velocity_variance[i], &s.velocity_mean[i], &s.velocity_variance[i]]);
        }
        tables.push(("pointer_velocity.csv".to_string(), csv));
        report.momentum = Some(r);
    }
    let mut out = Outcome::new(&p, &report)?;
    for (name, csv) in tables {
        out = out.table(name, csv);
    }
    Ok(out)
}
