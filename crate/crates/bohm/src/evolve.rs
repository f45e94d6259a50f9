//! Split-step Fourier evolution under `-hbar²/2m ∇² + V`, optionally with a
//! bilinear system-pointer coupling on 2D grids.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BohmError, Result};
use crate::fft::Spectral;
use crate::grid::GridWavefunction;

/// Steps whose stability number reaches this are refused.
pub const STABILITY_LIMIT: f64 = 10.0;

/// Interaction between the system coordinate x (axis 0) and the pointer
/// coordinate y (axis 1) of a 2D grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Coupling {
    /// `H = g x p_y`: the pointer is pushed along y at rate `g x`.
    Position { strength: f64 },
    /// `H = -g p_x y`: the pointer momentum grows at rate `g p_x`.
    Momentum { strength: f64 },
}

impl Coupling {
    pub fn strength(&self) -> f64 {
        match *self {
            Coupling::Position { strength } | Coupling::Momentum { strength } => strength,
        }
    }

    /// Velocity the coupling adds at `(x, y)`, i.e. `∂H/∂p`.
    pub fn drift(&self, x: f64, y: f64) -> [f64; 2] {
        match *self {
            Coupling::Position { strength } => [0.0, strength * x],
            Coupling::Momentum { strength } => [-strength * y, 0.0],
        }
    }
}

/// Dimensionless measure of how far `dt` is from resolving the fastest
/// phase rotation on the grid: `dt (Σ hbar π²/(2 m dx²) + max|V|/hbar)`.
pub fn stability_number(psi: &GridWavefunction, dt: f64) -> f64 {
    let kinetic: f64 = psi
        .axes()
        .iter()
        .zip(psi.masses())
        .map(|(a, m)| psi.hbar() * std::f64::consts::PI.powi(2) / (2.0 * m * a.dx() * a.dx()))
        .sum();
    let vmax = psi.potential().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    dt * (kinetic + vmax / psi.hbar())
}

/// Precomputed phases for Strang splitting: half potential (and coupling),
/// full kinetic in wavenumber space, half coupling and potential again.
#[derive(Debug, Clone)]
pub struct SplitStepPropagator {
    dt: f64,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    half_coupling: Option<(usize, Vec<Complex64>)>,
    spectral: Spectral,
}

impl SplitStepPropagator {
    pub fn new(psi: &GridWavefunction, dt: f64) -> Result<Self> {
        Self::with_coupling(psi, dt, None)
    }

    pub fn with_coupling(psi: &GridWavefunction, dt: f64, coupling: Option<Coupling>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(BohmError::NonPositiveStep(dt));
        }
        let number = stability_number(psi, dt);
        if number >= STABILITY_LIMIT {
            return Err(BohmError::UnstableStep { number, limit: STABILITY_LIMIT });
        }
        Self::signed(psi, dt, coupling)
    }

    /// Builds a propagator for any real step, including negative ones.
    pub(crate) fn signed(psi: &GridWavefunction, dt: f64, coupling: Option<Coupling>) -> Result<Self> {
        let hbar = psi.hbar();
        let half_potential = psi
            .potential()
            .iter()
            .map(|v| Complex64::from_polar(1.0, -v * dt / (2.0 * hbar)))
            .collect();
        let ks: Vec<Vec<f64>> = psi.axes().iter().map(|a| a.wavenumbers()).collect();
        let kinetic_energy = |idx: usize| -> f64 {
            match ks.as_slice() {
                [kx] => hbar * hbar * kx[idx] * kx[idx] / (2.0 * psi.masses()[0]),
                [kx, ky] => {
                    let (i, j) = (idx / ky.len(), idx % ky.len());
                    hbar * hbar * (kx[i] * kx[i] / (2.0 * psi.masses()[0]) + ky[j] * ky[j] / (2.0 * psi.masses()[1]))
                }
                _ => unreachable!(),
            }
        };
        let kinetic = (0..psi.len()).map(|idx| Complex64::from_polar(1.0, -kinetic_energy(idx) * dt / hbar)).collect();
        let half_coupling = match coupling {
            None => None,
            Some(c) => {
                if psi.ndim() != 2 {
                    return Err(BohmError::Dimension("coupling needs a 2D grid".into()));
                }
                let (ax, ay) = (psi.axes()[0], psi.axes()[1]);
                let ny = ay.len();
                let half = dt / 2.0;
                match c {
                    // diagonal in (x, k_y): exp(-i g x k_y dt/2)
                    Coupling::Position { strength } => {
                        let ky = ay.wavenumbers();
                        let phases = (0..psi.len())
                            .map(|idx| Complex64::from_polar(1.0, -strength * ax.coord(idx / ny) * ky[idx % ny] * half))
                            .collect();
                        Some((1, phases))
                    }
                    // diagonal in (k_x, y): exp(+i g k_x y dt/2)
                    Coupling::Momentum { strength } => {
                        let kx = ax.wavenumbers();
                        let phases = (0..psi.len())
                            .map(|idx| Complex64::from_polar(1.0, strength * kx[idx / ny] * ay.coord(idx % ny) * half))
                            .collect();
                        Some((0, phases))
                    }
                }
            }
        };
        Ok(Self { dt, half_potential, kinetic, half_coupling, spectral: Spectral::new(psi.axes()) })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, psi: &mut GridWavefunction) {
        let data = psi.samples_mut();
        multiply(data, &self.half_potential);
        self.apply_coupling(data);
        self.spectral.forward(data);
        multiply(data, &self.kinetic);
        self.spectral.inverse(data);
        self.apply_coupling(data);
        multiply(data, &self.half_potential);
    }

    fn apply_coupling(&self, data: &mut [Complex64]) {
        if let Some((axis, phases)) = &self.half_coupling {
            self.spectral.forward_axis(data, *axis);
            multiply(data, phases);
            self.spectral.inverse_axis(data, *axis);
        }
    }
}

fn multiply(data: &mut [Complex64], phases: &[Complex64]) {
    data.iter_mut().zip(phases).for_each(|(z, p)| *z *= p);
}

/// Advances `psi` by `steps` split-step increments of `dt`.
pub fn evolve_grid(psi: &GridWavefunction, dt: f64, steps: usize) -> Result<GridWavefunction> {
    let prop = SplitStepPropagator::new(psi, dt)?;
    let mut out = psi.clone();
    for _ in 0..steps {
        prop.step(&mut out);
    }
    Ok(out)
}

/// `⟨H⟩ / ⟨ψ|ψ⟩` with the kinetic term evaluated spectrally.
pub fn energy_expectation(psi: &GridWavefunction) -> f64 {
    let spectral = Spectral::new(psi.axes());
    let mut data = psi.samples().to_vec();
    spectral.forward(&mut data);
    let ks: Vec<Vec<f64>> = psi.axes().iter().map(|a| a.wavenumbers()).collect();
    let hbar = psi.hbar();
    let mut kinetic = 0.0;
    let mut total = 0.0;
    for (idx, z) in data.iter().enumerate() {
        let e = match ks.as_slice() {
            [kx] => hbar * hbar * kx[idx] * kx[idx] / (2.0 * psi.masses()[0]),
            [kx, ky] => {
                let (i, j) = (idx / ky.len(), idx % ky.len());
                hbar * hbar * (kx[i] * kx[i] / (2.0 * psi.masses()[0]) + ky[j] * ky[j] / (2.0 * psi.masses()[1]))
            }
            _ => unreachable!(),
        };
        kinetic += e * z.norm_sqr();
        total += z.norm_sqr();
    }
    let potential: f64 = psi.samples().iter().zip(psi.potential()).map(|(z, v)| v * z.norm_sqr()).sum();
    let norm: f64 = psi.samples().iter().map(|z| z.norm_sqr()).sum();
    kinetic / total + potential / norm
}
