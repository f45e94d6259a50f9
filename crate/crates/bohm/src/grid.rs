//! Uniform periodic grids and sampled wavefunctions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{BohmError, Result};

/// Smallest number of samples along any axis.
pub const MIN_POINTS: usize = 8;

/// One uniform, periodic coordinate axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    n: usize,
    dx: f64,
    origin: f64,
}

impl Axis {
    pub fn new(n: usize, dx: f64, origin: f64) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(BohmError::InvalidGrid(format!("need at least {MIN_POINTS} points, got {n}")));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(BohmError::InvalidGrid(format!("spacing must be positive, got {dx}")));
        }
        if !origin.is_finite() {
            return Err(BohmError::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { n, dx, origin })
    }

    /// `n` points covering `[start, end)`.
    pub fn spanning(n: usize, start: f64, end: f64) -> Result<Self> {
        if !(end > start) {
            return Err(BohmError::InvalidGrid(format!("empty range [{start}, {end})")));
        }
        Self::new(n, (end - start) / n as f64, start)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    /// Period of the axis.
    pub fn length(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.dx
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Open interval between the first and last sample.
    pub fn interior_contains(&self, x: f64) -> bool {
        x > self.origin && x < self.coord(self.n - 1)
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = 2.0 * PI / self.length();
        (0..self.n)
            .map(|i| {
                let m = if i < self.n.div_ceil(2) { i as f64 } else { i as f64 - self.n as f64 };
                m * dk
            })
            .collect()
    }

    /// Largest wavenumber magnitude the grid represents.
    pub fn nyquist(&self) -> f64 {
        PI / self.dx
    }
}

/// Complex samples on a 1D or 2D grid, together with the physical constants
/// that define the Hamiltonian `-hbar²/2m ∇² + V`.
///
/// 2D samples are stored row-major with axis 0 slowest: index `i * ny + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    samples: Vec<Complex64>,
    axes: Vec<Axis>,
    masses: Vec<f64>,
    hbar: f64,
    potential: Vec<f64>,
}

impl GridWavefunction {
    pub fn new(
        samples: Vec<Complex64>,
        axes: Vec<Axis>,
        masses: Vec<f64>,
        hbar: f64,
        potential: Option<Vec<f64>>,
    ) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(BohmError::InvalidGrid(format!("1 or 2 axes supported, got {}", axes.len())));
        }
        if masses.len() != axes.len() {
            return Err(BohmError::Dimension(format!(
                "{} masses for {} axes",
                masses.len(),
                axes.len()
            )));
        }
        if masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(BohmError::InvalidGrid("masses must be positive".into()));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(BohmError::InvalidGrid(format!("hbar must be positive, got {hbar}")));
        }
        let len: usize = axes.iter().map(Axis::len).product();
        if samples.len() != len {
            return Err(BohmError::Dimension(format!("{} samples for a grid of {len}", samples.len())));
        }
        let potential = potential.unwrap_or_else(|| vec![0.0; len]);
        if potential.len() != len {
            return Err(BohmError::Dimension(format!(
                "{} potential values for a grid of {len}",
                potential.len()
            )));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(BohmError::InvalidGrid("potential must be finite".into()));
        }
        let out = Self { samples, axes, masses, hbar, potential };
        let norm = out.norm_sqr();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(BohmError::InvalidGrid(format!("norm must be finite and positive, got {norm}")));
        }
        Ok(out)
    }

    pub fn new_1d(
        samples: Vec<Complex64>,
        axis: Axis,
        mass: f64,
        hbar: f64,
        potential: Option<Vec<f64>>,
    ) -> Result<Self> {
        Self::new(samples, vec![axis], vec![mass], hbar, potential)
    }

    /// Samples `f(x)` on every grid point.
    pub fn from_fn_1d(
        axis: Axis,
        mass: f64,
        hbar: f64,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let samples = axis.coords().into_iter().map(f).collect();
        Self::new_1d(samples, axis, mass, hbar, None)
    }

    /// Samples `f(x, y)` on every grid point.
    pub fn from_fn_2d(
        axes: [Axis; 2],
        masses: [f64; 2],
        hbar: f64,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(axes[0].len() * axes[1].len());
        for i in 0..axes[0].len() {
            for j in 0..axes[1].len() {
                samples.push(f(axes[0].coord(i), axes[1].coord(j)));
            }
        }
        Self::new(samples, axes.to_vec(), masses.to_vec(), hbar, None)
    }

    /// Gaussian packet whose density has standard deviation `sigma`,
    /// centred at `center` with mean wavenumber `k0`, normalised on the grid.
    pub fn gaussian_1d(axis: Axis, center: f64, sigma: f64, k0: f64, mass: f64, hbar: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(BohmError::InvalidArgument(format!("packet width must be positive, got {sigma}")));
        }
        let psi = Self::from_fn_1d(axis, mass, hbar, |x| gaussian_amplitude(x, center, sigma, k0))?;
        Ok(psi.normalized())
    }

    /// Replaces the potential, which must match the grid.
    pub fn with_potential(mut self, potential: Vec<f64>) -> Result<Self> {
        if potential.len() != self.samples.len() {
            return Err(BohmError::Dimension(format!(
                "{} potential values for a grid of {}",
                potential.len(),
                self.samples.len()
            )));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(BohmError::InvalidGrid("potential must be finite".into()));
        }
        self.potential = potential;
        Ok(self)
    }

    /// Replaces the samples, keeping grid and constants.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Result<Self> {
        Self::new(samples, self.axes.clone(), self.masses.clone(), self.hbar, Some(self.potential.clone()))
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Volume element `dx` or `dx·dy`.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::dx).product()
    }

    /// Coordinates of flat index `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        match self.axes.as_slice() {
            [a] => vec![a.coord(idx)],
            [a, b] => vec![a.coord(idx / b.len()), b.coord(idx % b.len())],
            _ => unreachable!(),
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn max_density(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max)
    }

    /// `Σ|ψ|² dV`.
    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_volume()
    }

    pub fn normalized(&self) -> Self {
        let s = 1.0 / self.norm_sqr().sqrt();
        let mut out = self.clone();
        out.samples.iter_mut().for_each(|z| *z *= s);
        out
    }

    /// `⟨φ|ψ⟩` on the same grid.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.axes != other.axes {
            return Err(BohmError::Dimension("wavefunctions live on different grids".into()));
        }
        let s: Complex64 = self.samples.iter().zip(&other.samples).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.cell_volume())
    }

    /// Mean of coordinate `axis` under the normalised density.
    pub fn mean(&self, axis: usize) -> f64 {
        let (num, den) = self.moment_sums(axis, |x| x);
        num / den
    }

    /// Variance of coordinate `axis` under the normalised density.
    pub fn variance(&self, axis: usize) -> f64 {
        let m = self.mean(axis);
        let (num, den) = self.moment_sums(axis, |x| (x - m) * (x - m));
        num / den
    }

    fn moment_sums(&self, axis: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let mut num = 0.0;
        let mut den = 0.0;
        for (idx, z) in self.samples.iter().enumerate() {
            let w = z.norm_sqr();
            num += w * f(self.point(idx)[axis]);
            den += w;
        }
        (num, den)
    }

    /// Sum of `|ψ|²` over the first and last `margin` samples of every axis,
    /// as a fraction of the total. Measures how close the state is to wrapping.
    pub fn edge_mass(&self, margin: usize) -> f64 {
        let total: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum();
        let near = |i: usize, n: usize| i < margin || i + margin >= n;
        let mut edge = 0.0;
        for (idx, z) in self.samples.iter().enumerate() {
            let on_edge = match self.axes.as_slice() {
                [a] => near(idx, a.len()),
                [a, b] => near(idx / b.len(), a.len()) || near(idx % b.len(), b.len()),
                _ => unreachable!(),
            };
            if on_edge {
                edge += z.norm_sqr();
            }
        }
        edge / total
    }
}

/// Unnormalised Gaussian amplitude with density standard deviation `sigma`.
pub fn gaussian_amplitude(x: f64, center: f64, sigma: f64, k0: f64) -> Complex64 {
    let d = x - center;
    Complex64::from_polar((-d * d / (4.0 * sigma * sigma)).exp(), k0 * x)
}

/// Density standard deviation of a free Gaussian packet after time `t`.
pub fn free_gaussian_width(sigma0: f64, t: f64, mass: f64, hbar: f64) -> f64 {
    let s = hbar * t / (2.0 * mass * sigma0 * sigma0);
    sigma0 * (1.0 + s * s).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_rejects_small_grids() {
        assert!(Axis::new(4, 0.1, 0.0).is_err());
        assert!(Axis::new(8, 0.0, 0.0).is_err());
        assert!(Axis::new(8, 0.1, 0.0).is_ok());
    }

    #[test]
    fn wavenumbers_in_fft_order() {
        let a = Axis::new(8, 1.0, 0.0).unwrap();
        let dk = 2.0 * PI / 8.0;
        let want = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0];
        for (k, w) in a.wavenumbers().iter().zip(want) {
            assert!((k - w * dk).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_state_rejected() {
        let a = Axis::new(8, 1.0, 0.0).unwrap();
        assert!(GridWavefunction::new_1d(vec![Complex64::new(0.0, 0.0); 8], a, 1.0, 1.0, None).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let a = Axis::spanning(512, -20.0, 20.0).unwrap();
        let psi = GridWavefunction::gaussian_1d(a, 1.5, 0.8, 2.0, 1.0, 1.0).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-13);
        assert!((psi.mean(0) - 1.5).abs() < 1e-10);
        assert!((psi.variance(0).sqrt() - 0.8).abs() < 1e-10);
        assert!(psi.edge_mass(4) < 1e-20);
    }

    #[test]
    fn two_dimensional_layout() {
        let ax = Axis::new(8, 1.0, 0.0).unwrap();
        let ay = Axis::new(10, 0.5, -1.0).unwrap();
        let psi = GridWavefunction::from_fn_2d([ax, ay], [1.0, 2.0], 1.0, |x, y| Complex64::new(1.0 + x, y)).unwrap();
        let idx = 3 * 10 + 4;
        assert_eq!(psi.point(idx), vec![3.0, 1.0]);
        assert_eq!(psi.samples()[idx], Complex64::new(4.0, 1.0));
    }
}
