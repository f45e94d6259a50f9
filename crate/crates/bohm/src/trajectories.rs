//! Guidance-equation integration `ṙ = j/|ψ|²` with RK4 in lockstep with the
//! split-step wavefunction evolution.

use serde::{Deserialize, Serialize};

use crate::current::{current_with, GradientScheme};
use crate::error::{BohmError, Result};
use crate::evolve::{Coupling, SplitStepPropagator};
use crate::fft::Spectral;
use crate::grid::{Axis, GridWavefunction};
use crate::interp::{interpolate_1d, interpolate_2d};
use crate::potential::NODE_FRACTION;

/// Particle coordinates sharing one wavefunction, stored particle-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEnsemble {
    positions: Vec<f64>,
    ndim: usize,
    time: f64,
}

impl TrajectoryEnsemble {
    pub fn new_1d(xs: Vec<f64>, time: f64) -> Self {
        Self { positions: xs, ndim: 1, time }
    }

    pub fn new_2d(points: &[[f64; 2]], time: f64) -> Self {
        Self { positions: points.iter().flatten().copied().collect(), ndim: 2, time }
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.ndim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.positions[i * self.ndim..(i + 1) * self.ndim]
    }

    /// Every particle's value of one coordinate.
    pub fn coordinate(&self, axis: usize) -> Vec<f64> {
        self.positions.iter().skip(axis).step_by(self.ndim).copied().collect()
    }

    /// Checks dimension and that every particle is strictly inside the grid.
    pub fn validate(&self, psi: &GridWavefunction) -> Result<()> {
        if self.ndim != psi.ndim() {
            return Err(BohmError::Dimension(format!(
                "{}D ensemble on a {}D grid",
                self.ndim,
                psi.ndim()
            )));
        }
        for i in 0..self.len() {
            if !inside(psi.axes(), self.particle(i)) {
                return Err(BohmError::LeftGrid { particle: i, time: self.time });
            }
        }
        Ok(())
    }
}

fn inside(axes: &[Axis], p: &[f64]) -> bool {
    axes.iter().zip(p).all(|(a, x)| a.interior_contains(*x))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryOptions {
    pub gradient: GradientScheme,
    pub coupling: Option<Coupling>,
}

impl TrajectoryOptions {
    pub fn spectral() -> Self {
        Self { gradient: GradientScheme::Spectral, coupling: None }
    }
}

/// Density and current on the grid at one instant.
#[derive(Debug, Clone)]
pub struct VelocityField {
    density: Vec<f64>,
    current: Vec<Vec<f64>>,
    threshold: f64,
    axes: Vec<Axis>,
    coupling: Option<Coupling>,
    time: f64,
}

impl VelocityField {
    pub fn new(psi: &GridWavefunction, options: &TrajectoryOptions, time: f64) -> Self {
        let spectral = (options.gradient == GradientScheme::Spectral).then(|| Spectral::new(psi.axes()));
        Self::build(psi, options, spectral.as_ref(), time)
    }

    fn build(psi: &GridWavefunction, options: &TrajectoryOptions, spectral: Option<&Spectral>, time: f64) -> Self {
        Self {
            density: psi.density(),
            current: current_with(psi, options.gradient, spectral),
            threshold: NODE_FRACTION * psi.max_density(),
            axes: psi.axes().to_vec(),
            coupling: options.coupling,
            time,
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Guidance velocity at `p`; `Err(density)` if `p` sits at a node.
    pub fn velocity(&self, p: &[f64], out: &mut [f64]) -> std::result::Result<(), f64> {
        let at = |values: &[f64]| match self.axes.as_slice() {
            [a] => interpolate_1d(values, a, p[0]),
            [a, b] => interpolate_2d(values, &[*a, *b], p[0], p[1]),
            _ => unreachable!(),
        };
        let rho = at(&self.density);
        if !(rho >= self.threshold) {
            return Err(rho);
        }
        for (o, j) in out.iter_mut().zip(&self.current) {
            *o = at(j) / rho;
        }
        if let Some(c) = self.coupling {
            let d = c.drift(p[0], p[1]);
            out[0] += d[0];
            out[1] += d[1];
        }
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

/// Owns the wavefunction and advances it with an ensemble, step by step.
#[derive(Debug, Clone)]
pub struct TrajectoryStepper {
    psi: GridWavefunction,
    dt: f64,
    options: TrajectoryOptions,
    half: SplitStepPropagator,
    spectral: Option<Spectral>,
    field: VelocityField,
    time: f64,
}

impl TrajectoryStepper {
    pub fn new(psi: GridWavefunction, dt: f64, options: TrajectoryOptions, time: f64) -> Result<Self> {
        if options.coupling.is_some() && psi.ndim() != 2 {
            return Err(BohmError::Dimension("coupling needs a 2D grid".into()));
        }
        // the full step is checked, the propagator runs at half steps
        SplitStepPropagator::with_coupling(&psi, dt, options.coupling)?;
        let half = SplitStepPropagator::with_coupling(&psi, dt / 2.0, options.coupling)?;
        let spectral = (options.gradient == GradientScheme::Spectral).then(|| Spectral::new(psi.axes()));
        let field = VelocityField::build(&psi, &options, spectral.as_ref(), time);
        Ok(Self { psi, dt, options, half, spectral, field, time })
    }

    pub fn psi(&self) -> &GridWavefunction {
        &self.psi
    }

    pub fn into_psi(self) -> GridWavefunction {
        self.psi
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn options(&self) -> &TrajectoryOptions {
        &self.options
    }

    /// Switches the interaction on or off from the next step onwards.
    pub fn set_coupling(&mut self, coupling: Option<Coupling>) -> Result<()> {
        let options = TrajectoryOptions { coupling, ..self.options };
        let fresh = Self::new(self.psi.clone(), self.dt, options, self.time)?;
        *self = fresh;
        Ok(())
    }

    /// Guidance velocities of every particle at the current time.
    pub fn velocities(&self, ens: &TrajectoryEnsemble) -> Result<Vec<f64>> {
        let mut out = vec![0.0; ens.positions.len()];
        for i in 0..ens.len() {
            let d = ens.ndim;
            self.field
                .velocity(ens.particle(i), &mut out[i * d..(i + 1) * d])
                .map_err(|density| self.node(i, density, self.time))?;
        }
        Ok(out)
    }

    fn node(&self, particle: usize, density: f64, time: f64) -> BohmError {
        BohmError::NodeEncounter { particle, time, density, threshold: self.field.threshold }
    }

    /// One RK4 step of the ensemble and two half steps of the wavefunction.
    pub fn step(&mut self, ens: &mut TrajectoryEnsemble) -> Result<()> {
        ens.validate(&self.psi)?;
        let (t, h) = (self.time, self.dt);
        self.half.step(&mut self.psi);
        let mid = VelocityField::build(&self.psi, &self.options, self.spectral.as_ref(), t + h / 2.0);
        self.half.step(&mut self.psi);
        let end = VelocityField::build(&self.psi, &self.options, self.spectral.as_ref(), t + h);
        let d = ens.ndim;
        let mut k = [[0.0; 2]; 4];
        let mut probe = [0.0; 2];
        for i in 0..ens.len() {
            let r = ens.particle(i).to_vec();
            let stage = |field: &VelocityField, p: &[f64], out: &mut [f64]| {
                field.velocity(p, out).map_err(|density| BohmError::NodeEncounter {
                    particle: i,
                    time: field.time,
                    density,
                    threshold: field.threshold,
                })
            };
            stage(&self.field, &r, &mut k[0][..d])?;
            for a in 0..d {
                probe[a] = r[a] + 0.5 * h * k[0][a];
            }
            stage(&mid, &probe[..d], &mut k[1][..d])?;
            for a in 0..d {
                probe[a] = r[a] + 0.5 * h * k[1][a];
            }
            stage(&mid, &probe[..d], &mut k[2][..d])?;
            for a in 0..d {
                probe[a] = r[a] + h * k[2][a];
            }
            stage(&end, &probe[..d], &mut k[3][..d])?;
            let p = &mut ens.positions[i * d..(i + 1) * d];
            for a in 0..d {
                p[a] = r[a] + h / 6.0 * (k[0][a] + 2.0 * k[1][a] + 2.0 * k[2][a] + k[3][a]);
            }
            if !inside(self.psi.axes(), p) {
                return Err(BohmError::LeftGrid { particle: i, time: t + h });
            }
        }
        self.field = end;
        self.time = t + h;
        ens.time = self.time;
        Ok(())
    }
}

/// Advances a wavefunction and ensemble together by one step of `dt`.
pub fn advance_trajectories(
    psi: &GridWavefunction,
    ens: &TrajectoryEnsemble,
    dt: f64,
    options: TrajectoryOptions,
) -> Result<(GridWavefunction, TrajectoryEnsemble)> {
    let mut stepper = TrajectoryStepper::new(psi.clone(), dt, options, ens.time())?;
    let mut out = ens.clone();
    stepper.step(&mut out)?;
    Ok((stepper.into_psi(), out))
}

/// True when sorting by `before` also sorts `after`, i.e. no two 1D
/// trajectories have swapped order.
pub fn order_preserved(before: &[f64], after: &[f64]) -> bool {
    order_violation(before, after) == 0.0
}

/// Largest distance by which a pair of 1D trajectories, adjacent in the
/// `before` ordering, has crossed in `after`.
pub fn order_violation(before: &[f64], after: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..before.len()).collect();
    idx.sort_by(|&a, &b| before[a].total_cmp(&before[b]));
    idx.windows(2).map(|w| (after[w[0]] - after[w[1]]).max(0.0)).fold(0.0, f64::max)
}
