//! Ready-made initial states used by the tests and the command-line scenarios.

use num_complex::Complex64;

use crate::equivariance::EquivarianceConfig;
use crate::error::Result;
use crate::grid::{gaussian_amplitude, Axis, GridWavefunction};

/// Free packet on a 1024-point grid over `[-40, 40)`, σ₀ = 1, k₀ = 1, run
/// until its width has doubled: `hbar T / (2 m σ₀²) = √3`.
pub fn free_gaussian() -> Result<(GridWavefunction, EquivarianceConfig)> {
    let axis = Axis::spanning(1024, -40.0, 40.0)?;
    let psi = GridWavefunction::gaussian_1d(axis, -3.0, 1.0, 1.0, 1.0, 1.0)?;
    let config = EquivarianceConfig { total_time: 2.0 * 3f64.sqrt(), dt: 0.005, ..Default::default() };
    Ok((psi, config))
}

/// Two packets approaching each other with unequal weights, so interference
/// fringes form without exact nodes.
pub fn two_gaussians() -> Result<(GridWavefunction, EquivarianceConfig)> {
    let axis = Axis::spanning(1024, -40.0, 40.0)?;
    let psi = GridWavefunction::from_fn_1d(axis, 1.0, 1.0, |x| {
        gaussian_amplitude(x, -4.0, 1.0, 1.5) * 0.8 + gaussian_amplitude(x, 4.0, 1.0, -1.5) * 0.6
    })?
    .normalized();
    let config = EquivarianceConfig { total_time: 4.0, dt: 0.005, ..Default::default() };
    Ok((psi, config))
}

/// Ground state of `V = m ω² x² / 2` sampled on `axis`, with its energy.
pub fn harmonic_ground(axis: Axis, mass: f64, omega: f64, hbar: f64) -> Result<(GridWavefunction, f64)> {
    let sigma = (hbar / (2.0 * mass * omega)).sqrt();
    let psi = GridWavefunction::from_fn_1d(axis, mass, hbar, |x| gaussian_amplitude(x, 0.0, sigma, 0.0))?;
    let v = axis.coords().iter().map(|x| 0.5 * mass * omega * omega * x * x).collect();
    Ok((psi.with_potential(v)?.normalized(), 0.5 * hbar * omega))
}

/// Band-limited plane wave `e^{ikx}` on a periodic axis; `k` is rounded to
/// the nearest grid wavenumber.
pub fn plane_wave(axis: Axis, k: f64, mass: f64, hbar: f64) -> Result<GridWavefunction> {
    let dk = 2.0 * std::f64::consts::PI / axis.length();
    let k = (k / dk).round() * dk;
    GridWavefunction::from_fn_1d(axis, mass, hbar, |x| Complex64::from_polar(1.0, k * x))
}
