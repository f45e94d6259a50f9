//! Probability current `j = (hbar/m) Im(ψ* ∇ψ)` and the continuity check.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BohmError, Result};
use crate::evolve::SplitStepPropagator;
use crate::fft::Spectral;
use crate::grid::GridWavefunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientScheme {
    /// Second-order central differences.
    #[default]
    Central,
    /// Exact differentiation of the band-limited interpolant.
    Spectral,
}

/// Partial derivative of the samples along `axis`, with periodic wrap.
pub fn gradient(psi: &GridWavefunction, axis: usize, scheme: GradientScheme) -> Vec<Complex64> {
    match scheme {
        GradientScheme::Central => central_derivative(psi, psi.samples(), axis),
        GradientScheme::Spectral => spectral_derivative(psi, &Spectral::new(psi.axes()), axis),
    }
}

pub(crate) fn central_derivative<T>(psi: &GridWavefunction, values: &[T], axis: usize) -> Vec<T>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let a = psi.axes()[axis];
    let n = a.len();
    let stride = if axis == 0 && psi.ndim() == 2 { psi.axes()[1].len() } else { 1 };
    let scale = 1.0 / (2.0 * a.dx());
    (0..values.len())
        .map(|idx| {
            let i = (idx / stride) % n;
            let base = idx - i * stride;
            let up = base + ((i + 1) % n) * stride;
            let down = base + ((i + n - 1) % n) * stride;
            (values[up] - values[down]) * scale
        })
        .collect()
}

pub(crate) fn spectral_derivative(psi: &GridWavefunction, spectral: &Spectral, axis: usize) -> Vec<Complex64> {
    let a = psi.axes()[axis];
    let n = a.len();
    let mut ks = a.wavenumbers();
    if n % 2 == 0 {
        // the Nyquist mode has no consistent derivative
        ks[n / 2] = 0.0;
    }
    let stride = if axis == 0 && psi.ndim() == 2 { psi.axes()[1].len() } else { 1 };
    let mut data = psi.samples().to_vec();
    spectral.forward_axis(&mut data, axis);
    for (idx, z) in data.iter_mut().enumerate() {
        *z *= Complex64::new(0.0, ks[(idx / stride) % n]);
    }
    spectral.inverse_axis(&mut data, axis);
    data
}

/// One current component per axis, in units of `hbar/m` times density.
pub fn probability_current(psi: &GridWavefunction, scheme: GradientScheme) -> Vec<Vec<f64>> {
    let spectral = (scheme == GradientScheme::Spectral).then(|| Spectral::new(psi.axes()));
    current_with(psi, scheme, spectral.as_ref())
}

pub(crate) fn current_with(
    psi: &GridWavefunction,
    scheme: GradientScheme,
    spectral: Option<&Spectral>,
) -> Vec<Vec<f64>> {
    (0..psi.ndim())
        .map(|axis| {
            let d = match (scheme, spectral) {
                (GradientScheme::Spectral, Some(sp)) => spectral_derivative(psi, sp, axis),
                (GradientScheme::Spectral, None) => spectral_derivative(psi, &Spectral::new(psi.axes()), axis),
                (GradientScheme::Central, _) => central_derivative(psi, psi.samples(), axis),
            };
            let c = psi.hbar() / psi.masses()[axis];
            psi.samples().iter().zip(&d).map(|(z, dz)| c * (z.conj() * dz).im).collect()
        })
        .collect()
}

/// Central-difference divergence of a current field.
pub fn divergence(psi: &GridWavefunction, current: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; psi.len()];
    for (axis, comp) in current.iter().enumerate() {
        for (o, d) in out.iter_mut().zip(central_derivative(psi, comp, axis)) {
            *o += d;
        }
    }
    out
}

/// L2 norm of `∂t|ψ|² + ∇·j`, with the time derivative taken by a centred
/// difference over `±dt` of the spectral evolution and `j` by central differences.
pub fn continuity_residual(psi: &GridWavefunction, dt: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(BohmError::NonPositiveStep(dt));
    }
    let mut ahead = psi.clone();
    SplitStepPropagator::signed(psi, dt, None)?.step(&mut ahead);
    let mut behind = psi.clone();
    SplitStepPropagator::signed(psi, -dt, None)?.step(&mut behind);
    let div = divergence(psi, &probability_current(psi, GradientScheme::Central));
    let sum: f64 = ahead
        .samples()
        .iter()
        .zip(behind.samples())
        .zip(&div)
        .map(|((a, b), d)| {
            let r = (a.norm_sqr() - b.norm_sqr()) / (2.0 * dt) + d;
            r * r
        })
        .sum();
    Ok((sum * psi.cell_volume()).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementStudy {
    pub spacings: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Least-squares slope of log residual against log spacing.
    pub slope: f64,
}

/// Continuity residual on a sequence of grids built by `build(n)`.
pub fn continuity_refinement(
    build: impl Fn(usize) -> Result<GridWavefunction>,
    sizes: &[usize],
    dt: f64,
) -> Result<RefinementStudy> {
    if sizes.len() < 2 {
        return Err(BohmError::InvalidArgument("refinement needs at least two grids".into()));
    }
    let mut spacings = Vec::new();
    let mut residuals = Vec::new();
    for &n in sizes {
        let psi = build(n)?;
        spacings.push(psi.axes()[0].dx());
        residuals.push(continuity_residual(&psi, dt)?);
    }
    let slope = log_log_slope(&spacings, &residuals);
    Ok(RefinementStudy { spacings, residuals, slope })
}

pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;

    #[test]
    fn real_state_carries_no_current() {
        let a = Axis::spanning(128, -10.0, 10.0).unwrap();
        let psi = GridWavefunction::from_fn_1d(a, 1.0, 1.0, |x| Complex64::new((-x * x).exp() * (1.0 + x), 0.0)).unwrap();
        assert!(probability_current(&psi, GradientScheme::Central)[0].iter().all(|j| *j == 0.0));
        assert!(probability_current(&psi, GradientScheme::Spectral)[0].iter().all(|j| j.abs() < 1e-14));
    }

    #[test]
    fn plane_wave_current_spectral() {
        let a = Axis::spanning(64, 0.0, 4.0 * std::f64::consts::PI).unwrap();
        let (k, m, hbar) = (3.5, 0.7, 1.1);
        let psi = GridWavefunction::from_fn_1d(a, m, hbar, |x| Complex64::from_polar(0.8, k * x)).unwrap();
        let j = probability_current(&psi, GradientScheme::Spectral);
        for (jj, rho) in j[0].iter().zip(psi.density()) {
            assert!((jj - hbar * k / m * rho).abs() < 1e-10);
        }
    }

    #[test]
    fn plane_wave_current_2d() {
        let ax = Axis::spanning(16, 0.0, 2.0 * std::f64::consts::PI).unwrap();
        let ay = Axis::spanning(32, 0.0, 2.0 * std::f64::consts::PI).unwrap();
        let psi = GridWavefunction::from_fn_2d([ax, ay], [1.0, 2.0], 1.0, |x, y| Complex64::from_polar(1.0, 2.0 * x - 3.0 * y)).unwrap();
        let j = probability_current(&psi, GradientScheme::Spectral);
        assert!(j[0].iter().all(|v| (v - 2.0).abs() < 1e-10));
        assert!(j[1].iter().all(|v| (v + 1.5).abs() < 1e-10));
    }

    #[test]
    fn continuity_is_second_order() {
        let study = continuity_refinement(
            |n| {
                let a = Axis::spanning(n, -20.0, 20.0)?;
                GridWavefunction::gaussian_1d(a, -1.0, 1.0, 1.5, 1.0, 1.0)
            },
            &[64, 128, 256, 512],
            1e-4,
        )
        .unwrap();
        assert!(study.slope >= 1.8, "{study:?}");
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [0.1, 0.2, 0.4];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((log_log_slope(&xs, &ys) - 2.0).abs() < 1e-12);
    }
}
