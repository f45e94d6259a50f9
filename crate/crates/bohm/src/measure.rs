//! Two-coordinate measurement models: a particle coordinate x (axis 0)
//! coupled to a pointer coordinate y (axis 1). The idealised delta-function
//! pointer states are replaced by Gaussians of amplitude width σ, i.e.
//! `φ(y) ∝ exp(-y²/2σ²)`.

use num_complex::Complex64;
use qmwb_core::measurement::RandomSource;
use serde::{Deserialize, Serialize};

use crate::error::{BohmError, Result};
use crate::evolve::{Coupling, SplitStepPropagator};
use crate::grid::{gaussian_amplitude, Axis, GridWavefunction};
use crate::interp::{interpolate_1d, interpolate_2d};
use crate::output::TrajectoryLog;
use crate::trajectories::{TrajectoryEnsemble, TrajectoryOptions, TrajectoryStepper};

/// `points` samples covering `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub points: usize,
    pub start: f64,
    pub end: f64,
}

impl AxisSpec {
    pub fn axis(&self) -> Result<Axis> {
        Axis::spanning(self.points, self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionMeasurementConfig {
    /// Centres of the particle packets; one packet or an equal-weight superposition.
    pub packet_centers: Vec<f64>,
    /// Density standard deviation of each particle packet.
    pub packet_width: f64,
    pub pointer_sigma: f64,
    /// Duration of the coupling `H = x p_y / τ`, which moves the pointer by x.
    pub coupling_time: f64,
    /// Free evolution after the coupling is switched off.
    pub settle_time: f64,
    pub dt: f64,
    pub particle_mass: f64,
    pub pointer_mass: f64,
    pub hbar: f64,
    pub grid_x: AxisSpec,
    pub grid_y: AxisSpec,
    pub trajectories: usize,
}

impl PositionMeasurementConfig {
    pub fn two_packet() -> Self {
        Self {
            packet_centers: vec![-4.0, 4.0],
            packet_width: 0.4,
            pointer_sigma: 1.0,
            coupling_time: 1.0,
            settle_time: 1.0,
            dt: 0.01,
            particle_mass: 10.0,
            pointer_mass: 20.0,
            hbar: 1.0,
            grid_x: AxisSpec { points: 128, start: -12.0, end: 12.0 },
            grid_y: AxisSpec { points: 128, start: -12.0, end: 12.0 },
            trajectories: 100,
        }
    }

    pub fn single_packet(center: f64) -> Self {
        Self { packet_centers: vec![center], ..Self::two_packet() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointerTrajectory {
    pub initial: [f64; 2],
    #[serde(rename = "final")]
    pub end: [f64; 2],
    /// Branch with the largest density at the start and at the end.
    pub initial_packet: usize,
    pub packet: usize,
    /// `|y_end - ⟨x⟩_branch|`.
    pub pointer_error: f64,
    pub within: bool,
    /// Mass of the conditional density `|ψ(x, y_end)|²` near the followed packet.
    pub conditional_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionMeasurementReport {
    pub pointer_sigma: f64,
    pub dx: f64,
    pub dy: f64,
    /// `E|x - y|` under the final joint density.
    pub mean_abs_separation: f64,
    pub separation_within: bool,
    pub branch_weights: Vec<f64>,
    /// Final `⟨x⟩` of each branch.
    pub branch_centers: Vec<f64>,
    /// Largest normalised `∫|ψ_a||ψ_b|` over distinct branches, 0 for one branch.
    pub branch_overlap: f64,
    /// `‖ψ - Σ ψ_b‖`: the branches evolve linearly.
    pub linearity_error: f64,
    pub trajectories: Vec<PointerTrajectory>,
    pub landed_within: usize,
    pub same_packet: usize,
    pub min_conditional_mass: f64,
    pub norm_drift: f64,
}

#[derive(Debug, Clone)]
pub struct PositionMeasurementRun {
    pub report: PositionMeasurementReport,
    pub final_psi: GridWavefunction,
    pub log: TrajectoryLog,
}

fn check_resolution(sigma: f64, axes: &[Axis; 2]) -> Result<()> {
    let d = axes[0].dx().max(axes[1].dx());
    if !(sigma >= 3.0 * d) {
        return Err(BohmError::GridTooCoarse { sigma, limit: 3.0 * d });
    }
    Ok(())
}

fn check_times(dt: f64, coupling: f64, settle: f64) -> Result<(usize, usize)> {
    if !(dt > 0.0) {
        return Err(BohmError::NonPositiveStep(dt));
    }
    if !(coupling > 0.0 && settle >= 0.0) {
        return Err(BohmError::InvalidArgument(format!(
            "coupling time must be positive and settle time non-negative, got {coupling} and {settle}"
        )));
    }
    Ok(((coupling / dt).round().max(1.0) as usize, (settle / dt).round() as usize))
}

/// Runs `steps` split steps under each `(coupling, steps)` phase in turn.
fn evolve_phases(psi: &GridWavefunction, dt: f64, phases: &[(Option<Coupling>, usize)]) -> Result<GridWavefunction> {
    let mut out = psi.clone();
    for &(coupling, steps) in phases {
        let prop = SplitStepPropagator::with_coupling(&out, dt, coupling)?;
        for _ in 0..steps {
            prop.step(&mut out);
        }
    }
    Ok(out)
}

/// Draws `k` points from `|ψ|²`: a grid cell by its weight, then a uniform
/// offset within half a spacing, kept inside the grid interior.
pub fn sample_points_2d(psi: &GridWavefunction, k: usize, source: &mut RandomSource) -> Result<Vec<[f64; 2]>> {
    if psi.ndim() != 2 {
        return Err(BohmError::Dimension("sampling needs a 2D grid".into()));
    }
    let (ax, ay) = (psi.axes()[0], psi.axes()[1]);
    let mut cumulative = Vec::with_capacity(psi.len());
    let mut acc = 0.0;
    for r in psi.density() {
        acc += r;
        cumulative.push(acc);
    }
    let clamp = |a: &Axis, v: f64| v.clamp(a.coord(0) + 1e-9 * a.dx(), a.coord(a.len() - 1) - 1e-9 * a.dx());
    Ok((0..k)
        .map(|_| {
            let u = source.uniform() * acc;
            let idx = cumulative.partition_point(|c| *c <= u).min(psi.len() - 1);
            let p = psi.point(idx);
            let x = p[0] + (source.uniform() - 0.5) * ax.dx();
            let y = p[1] + (source.uniform() - 0.5) * ay.dx();
            [clamp(&ax, x), clamp(&ay, y)]
        })
        .collect())
}

fn density_at(psi: &GridWavefunction, p: [f64; 2]) -> f64 {
    let axes = [psi.axes()[0], psi.axes()[1]];
    interpolate_2d(&psi.density(), &axes, p[0], p[1])
}

fn argmax(values: &[f64]) -> usize {
    values.iter().enumerate().fold(0, |best, (i, v)| if *v > values[best] { i } else { best })
}

/// `|ψ(x_i, y)|²` along the x grid at a fixed pointer coordinate.
fn conditional_density(psi: &GridWavefunction, y: f64) -> Vec<f64> {
    let (ax, ay) = (psi.axes()[0], psi.axes()[1]);
    let ny = ay.len();
    (0..ax.len())
        .map(|i| {
            let row = &psi.samples()[i * ny..(i + 1) * ny];
            let re: Vec<f64> = row.iter().map(|z| z.re).collect();
            let im: Vec<f64> = row.iter().map(|z| z.im).collect();
            let (a, b) = (interpolate_1d(&re, &ay, y), interpolate_1d(&im, &ay, y));
            a * a + b * b
        })
        .collect()
}

fn overlap(a: &GridWavefunction, b: &GridWavefunction) -> f64 {
    let s: f64 = a.samples().iter().zip(b.samples()).map(|(p, q)| p.norm() * q.norm()).sum();
    s * a.cell_volume() / (a.norm_sqr() * b.norm_sqr()).sqrt()
}

/// Impulsive position measurement: a pointer is pushed along y by the
/// particle coordinate, the coupling is switched off and the system settles.
/// Bohmian trajectories, sampled from the initial `|ψ|²`, are followed
/// throughout.
pub fn position_measurement_model(
    config: &PositionMeasurementConfig,
    source: &mut RandomSource,
) -> Result<PositionMeasurementRun> {
    if config.packet_centers.is_empty() {
        return Err(BohmError::InvalidArgument("need at least one packet".into()));
    }
    if !(config.packet_width > 0.0) {
        return Err(BohmError::InvalidArgument(format!("packet width must be positive, got {}", config.packet_width)));
    }
    let axes = [config.grid_x.axis()?, config.grid_y.axis()?];
    check_resolution(config.pointer_sigma, &axes)?;
    let (coupling_steps, settle_steps) = check_times(config.dt, config.coupling_time, config.settle_time)?;
    let sigma = config.pointer_sigma;
    let masses = [config.particle_mass, config.pointer_mass];
    let mut branches = config
        .packet_centers
        .iter()
        .map(|&c| {
            GridWavefunction::from_fn_2d(axes, masses, config.hbar, |x, y| {
                gaussian_amplitude(x, c, config.packet_width, 0.0) * gaussian_amplitude(y, 0.0, sigma / 2f64.sqrt(), 0.0)
            })
            .map(|b| b.normalized())
        })
        .collect::<Result<Vec<_>>>()?;
    let total: Vec<Complex64> = (0..branches[0].len()).map(|i| branches.iter().map(|b| b.samples()[i]).sum()).collect();
    let psi0 = branches[0].with_samples(total)?;
    let scale = 1.0 / psi0.norm_sqr().sqrt();
    let psi0 = psi0.normalized();
    for b in &mut branches {
        *b = b.with_samples(b.samples().iter().map(|z| z * scale).collect())?;
    }
    let coupling = Some(Coupling::Position { strength: 1.0 / config.coupling_time });
    // same half steps as the trajectory stepper, so branches sum to the full state
    let phases = [(coupling, 2 * coupling_steps), (None, 2 * settle_steps)];
    let finals = branches.iter().map(|b| evolve_phases(b, config.dt / 2.0, &phases)).collect::<Result<Vec<_>>>()?;

    let start = sample_points_2d(&psi0, config.trajectories, source)?;
    let mut ens = TrajectoryEnsemble::new_2d(&start, 0.0);
    let options = TrajectoryOptions { coupling, ..TrajectoryOptions::spectral() };
    let mut stepper = TrajectoryStepper::new(psi0.clone(), config.dt, options, 0.0)?;
    let mut log = TrajectoryLog::new(2);
    log.record(&ens, ens.len());
    let stride = ((coupling_steps + settle_steps) / 50).max(1);
    for step in 1..=coupling_steps + settle_steps {
        if step == coupling_steps + 1 {
            stepper.set_coupling(None)?;
        }
        stepper.step(&mut ens)?;
        if step % stride == 0 {
            log.record(&ens, ens.len());
        }
    }
    let psi = stepper.into_psi();

    let total: Vec<Complex64> = (0..psi.len()).map(|i| finals.iter().map(|b| b.samples()[i]).sum()).collect();
    let linearity_error = psi
        .samples()
        .iter()
        .zip(&total)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        * psi.cell_volume().sqrt();
    let branch_centers: Vec<f64> = finals.iter().map(|b| b.mean(0)).collect();
    let branch_spreads: Vec<f64> = finals.iter().map(|b| b.variance(0).sqrt()).collect();
    let mut branch_overlap: f64 = 0.0;
    for a in 0..finals.len() {
        for b in a + 1..finals.len() {
            branch_overlap = branch_overlap.max(overlap(&finals[a], &finals[b]));
        }
    }
    let rho = psi.density();
    let separation: f64 = (0..psi.len()).map(|i| {
        let p = psi.point(i);
        rho[i] * (p[0] - p[1]).abs()
    }).sum::<f64>() / rho.iter().sum::<f64>();

    let xs = axes[0].coords();
    let mut trajectories = Vec::new();
    for (i, &initial) in start.iter().enumerate() {
        let end = [ens.particle(i)[0], ens.particle(i)[1]];
        let initial_packet = argmax(&branches.iter().map(|b| density_at(b, initial)).collect::<Vec<_>>());
        let packet = argmax(&finals.iter().map(|b| density_at(b, end)).collect::<Vec<_>>());
        let pointer_error = (end[1] - branch_centers[packet]).abs();
        let cond = conditional_density(&psi, end[1]);
        let c = branch_centers[packet];
        let near: f64 = xs
            .iter()
            .zip(&cond)
            .filter(|(x, _)| {
                (*x - c).abs() <= 6.0 * branch_spreads[packet]
                    && branch_centers.iter().all(|o| (*x - c).abs() <= (*x - o).abs())
            })
            .map(|(_, r)| r)
            .sum();
        let total_cond: f64 = cond.iter().sum();
        trajectories.push(PointerTrajectory {
            initial,
            end,
            initial_packet,
            packet,
            pointer_error,
            within: pointer_error < 3.0 * sigma,
            conditional_mass: near / total_cond,
        });
    }
    let report = PositionMeasurementReport {
        pointer_sigma: sigma,
        dx: axes[0].dx(),
        dy: axes[1].dx(),
        mean_abs_separation: separation,
        separation_within: separation < 3.0 * sigma,
        branch_weights: branches.iter().map(|b| b.norm_sqr()).collect(),
        branch_centers,
        branch_overlap,
        linearity_error,
        landed_within: trajectories.iter().filter(|t| t.within).count(),
        same_packet: trajectories.iter().filter(|t| t.initial_packet == t.packet).count(),
        min_conditional_mass: trajectories.iter().map(|t| t.conditional_mass).fold(1.0, f64::min),
        trajectories,
        norm_drift: (psi.norm_sqr() - 1.0).abs(),
    };
    Ok(PositionMeasurementRun { report, final_psi: psi, log })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumProbeConfig {
    /// Wavenumbers of the particle's momentum components.
    pub wavenumbers: Vec<f64>,
    /// Amplitudes of the components, normalised internally.
    pub amplitudes: Vec<f64>,
    /// Density standard deviation of the common particle envelope.
    pub envelope_width: f64,
    pub pointer_sigma: f64,
    /// `g` in `H = -g p_x y`, which adds `g hbar k` to the pointer momentum per unit time.
    pub coupling_strength: f64,
    pub coupling_time: f64,
    pub settle_time: f64,
    pub dt: f64,
    pub particle_mass: f64,
    pub pointer_mass: f64,
    pub hbar: f64,
    pub grid_x: AxisSpec,
    pub grid_y: AxisSpec,
    pub trajectories: usize,
}

impl MomentumProbeConfig {
    pub fn standard() -> Self {
        Self {
            wavenumbers: vec![2.0, -2.0],
            amplitudes: vec![0.6f64.sqrt(), 0.4f64.sqrt()],
            envelope_width: 3.0,
            pointer_sigma: 3.0,
            coupling_strength: 0.5,
            coupling_time: 1.0,
            settle_time: 3.0,
            dt: 0.01,
            particle_mass: 20.0,
            pointer_mass: 5.0,
            hbar: 1.0,
            grid_x: AxisSpec { points: 128, start: -24.0, end: 24.0 },
            grid_y: AxisSpec { points: 128, start: -24.0, end: 24.0 },
            trajectories: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRun {
    pub components: usize,
    pub times: Vec<f64>,
    /// Ensemble mean and variance of the pointer velocity `ẏ` at each time.
    pub velocity_mean: Vec<f64>,
    pub velocity_variance: Vec<f64>,
    /// Mean variance over the last quarter of the run.
    pub late_variance: f64,
    /// Largest `|ρ - Σρ_b| / Σρ_b` where the incoherent density exceeds half its peak.
    pub fringe_visibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumProbeReport {
    pub control: ProbeRun,
    pub superposition: ProbeRun,
    pub variance_ratio: f64,
    /// `g τ hbar k / m_y` for each component.
    pub predicted_pointer_velocities: Vec<f64>,
}

fn probe_run(
    config: &MomentumProbeConfig,
    components: &[(f64, f64)],
    source: &mut RandomSource,
) -> Result<ProbeRun> {
    let axes = [config.grid_x.axis()?, config.grid_y.axis()?];
    let (coupling_steps, settle_steps) = check_times(config.dt, config.coupling_time, config.settle_time)?;
    let masses = [config.particle_mass, config.pointer_mass];
    let sigma = config.pointer_sigma;
    let branches = components
        .iter()
        .map(|&(k, amp)| {
            GridWavefunction::from_fn_2d(axes, masses, config.hbar, |x, y| {
                gaussian_amplitude(x, 0.0, config.envelope_width, k) * gaussian_amplitude(y, 0.0, sigma / 2f64.sqrt(), 0.0) * amp
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total: Vec<Complex64> = (0..branches[0].len()).map(|i| branches.iter().map(|b| b.samples()[i]).sum()).collect();
    let scale = 1.0 / branches[0].with_samples(total.clone())?.norm_sqr().sqrt();
    let psi0 = branches[0].with_samples(total.iter().map(|z| z * scale).collect())?;
    let coupling = Some(Coupling::Momentum { strength: config.coupling_strength });
    // same half steps as the trajectory stepper, so branches sum to the full state
    let phases = [(coupling, 2 * coupling_steps), (None, 2 * settle_steps)];
    let finals = branches
        .iter()
        .map(|b| evolve_phases(&b.with_samples(b.samples().iter().map(|z| z * scale).collect())?, config.dt / 2.0, &phases))
        .collect::<Result<Vec<_>>>()?;

    let start = sample_points_2d(&psi0, config.trajectories, source)?;
    let mut ens = TrajectoryEnsemble::new_2d(&start, 0.0);
    let options = TrajectoryOptions { coupling, ..TrajectoryOptions::spectral() };
    let mut stepper = TrajectoryStepper::new(psi0, config.dt, options, 0.0)?;
    let total_steps = coupling_steps + settle_steps;
    let mut times = Vec::with_capacity(total_steps);
    let mut velocity_mean = Vec::with_capacity(total_steps);
    let mut velocity_variance = Vec::with_capacity(total_steps);
    for step in 1..=total_steps {
        if step == coupling_steps + 1 {
            stepper.set_coupling(None)?;
        }
        stepper.step(&mut ens)?;
        let v = stepper.velocities(&ens)?;
        let vy: Vec<f64> = v.iter().skip(1).step_by(2).copied().collect();
        let n = vy.len() as f64;
        let mean = vy.iter().sum::<f64>() / n;
        times.push(stepper.time());
        velocity_mean.push(mean);
        velocity_variance.push(vy.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n);
    }
    let late_start = total_steps - total_steps.div_ceil(4);
    let late = &velocity_variance[late_start..];
    let late_variance = late.iter().sum::<f64>() / late.len() as f64;

    let rho = stepper.psi().density();
    let incoherent: Vec<f64> = (0..rho.len()).map(|i| finals.iter().map(|b| b.samples()[i].norm_sqr()).sum()).collect();
    let peak = incoherent.iter().copied().fold(0.0, f64::max);
    let fringe_visibility = rho
        .iter()
        .zip(&incoherent)
        .filter(|(_, inc)| **inc >= 0.5 * peak)
        .map(|(r, inc)| (r - inc).abs() / inc)
        .fold(0.0, f64::max);
    Ok(ProbeRun { components: components.len(), times, velocity_mean, velocity_variance, late_variance, fringe_visibility })
}

/// Momentum-type coupling: the pointer momentum records the particle
/// momentum. With one momentum component the pointer velocity settles; with
/// several, every component keeps steering the pointer and its velocity
/// spread stays large.
pub fn momentum_measurement_probe(config: &MomentumProbeConfig, source: &mut RandomSource) -> Result<MomentumProbeReport> {
    if config.wavenumbers.len() < 2 || config.wavenumbers.len() != config.amplitudes.len() {
        return Err(BohmError::InvalidArgument(
            "need at least two momentum components with one amplitude each".into(),
        ));
    }
    if config.amplitudes.iter().any(|a| !(*a > 0.0)) {
        return Err(BohmError::InvalidArgument("amplitudes must be positive".into()));
    }
    let axes = [config.grid_x.axis()?, config.grid_y.axis()?];
    check_resolution(config.pointer_sigma, &axes)?;
    let comps: Vec<(f64, f64)> = config.wavenumbers.iter().copied().zip(config.amplitudes.iter().copied()).collect();
    let control = probe_run(config, &comps[..1], source)?;
    let superposition = probe_run(config, &comps, source)?;
    let predicted_pointer_velocities = config
        .wavenumbers
        .iter()
        .map(|k| config.coupling_strength * config.coupling_time * config.hbar * k / config.pointer_mass)
        .collect();
    Ok(MomentumProbeReport {
        variance_ratio: superposition.late_variance / control.late_variance,
        control,
        superposition,
        predicted_pointer_velocities,
    })
}
