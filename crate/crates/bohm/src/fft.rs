//! FFTs over one axis or the whole grid.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Axis;

/// Cached forward and inverse plans for a 1D or 2D grid.
#[derive(Clone)]
pub struct Spectral {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("shape", &self.shape).finish()
    }
}

impl Spectral {
    pub fn new(axes: &[Axis]) -> Self {
        let mut planner = FftPlanner::new();
        let shape: Vec<usize> = axes.iter().map(Axis::len).collect();
        let forward = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Self { shape, forward, inverse }
    }

    /// Unnormalised forward transform over every axis.
    pub fn forward(&self, data: &mut [Complex64]) {
        for axis in 0..self.shape.len() {
            self.forward_axis(data, axis);
        }
    }

    /// Inverse transform over every axis, normalised so it undoes `forward`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        for axis in 0..self.shape.len() {
            self.inverse_axis(data, axis);
        }
    }

    pub fn forward_axis(&self, data: &mut [Complex64], axis: usize) {
        self.apply(data, axis, &self.forward[axis]);
    }

    pub fn inverse_axis(&self, data: &mut [Complex64], axis: usize) {
        self.apply(data, axis, &self.inverse[axis]);
        let s = 1.0 / self.shape[axis] as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    fn apply(&self, data: &mut [Complex64], axis: usize, plan: &Arc<dyn Fft<f64>>) {
        match (self.shape.len(), axis) {
            (1, 0) | (2, 1) => plan.process(data),
            (2, 0) => {
                let (nx, ny) = (self.shape[0], self.shape[1]);
                let mut column = vec![Complex64::new(0.0, 0.0); nx];
                for j in 0..ny {
                    for i in 0..nx {
                        column[i] = data[i * ny + j];
                    }
                    plan.process(&mut column);
                    for i in 0..nx {
                        data[i * ny + j] = column[i];
                    }
                }
            }
            _ => unreachable!("axis {axis} out of range"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_2d() {
        let axes = [Axis::new(8, 1.0, 0.0).unwrap(), Axis::new(12, 1.0, 0.0).unwrap()];
        let sp = Spectral::new(&axes);
        let orig: Vec<Complex64> = (0..96).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut data = orig.clone();
        sp.forward(&mut data);
        sp.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn single_mode_lands_in_one_bin() {
        let axes = [Axis::new(8, 1.0, 0.0).unwrap(), Axis::new(8, 1.0, 0.0).unwrap()];
        let sp = Spectral::new(&axes);
        let (kx, ky) = (2.0, 3.0);
        let mut data: Vec<Complex64> = (0..64)
            .map(|idx| {
                let (i, j) = ((idx / 8) as f64, (idx % 8) as f64);
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (kx * i + ky * j) / 8.0)
            })
            .collect();
        sp.forward(&mut data);
        for (idx, z) in data.iter().enumerate() {
            let want = if idx == 2 * 8 + 3 { 64.0 } else { 0.0 };
            assert!((z.norm() - want).abs() < 1e-10);
        }
    }
}
