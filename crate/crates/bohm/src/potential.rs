//! Quantum potential `Q = -(hbar²/2m) ∇²|ψ| / |ψ|`.

use crate::grid::GridWavefunction;

/// Points whose density falls below this fraction of the peak are nodes.
pub const NODE_FRACTION: f64 = 1e-12;

/// Quantum potential from central second differences of `|ψ|`, NaN at nodes.
pub fn quantum_potential(psi: &GridWavefunction) -> Vec<f64> {
    let amp: Vec<f64> = psi.samples().iter().map(|z| z.norm()).collect();
    let threshold = NODE_FRACTION * psi.max_density();
    let mut lap = vec![0.0; psi.len()];
    for (axis, a) in psi.axes().iter().enumerate() {
        let n = a.len();
        let stride = if axis == 0 && psi.ndim() == 2 { psi.axes()[1].len() } else { 1 };
        let c = -psi.hbar() * psi.hbar() / (2.0 * psi.masses()[axis] * a.dx() * a.dx());
        for (idx, l) in lap.iter_mut().enumerate() {
            let i = (idx / stride) % n;
            let base = idx - i * stride;
            let up = amp[base + ((i + 1) % n) * stride];
            let down = amp[base + ((i + n - 1) % n) * stride];
            *l += c * (up - 2.0 * amp[idx] + down);
        }
    }
    lap.iter()
        .zip(&amp)
        .map(|(l, r)| if r * r < threshold { f64::NAN } else { l / r })
        .collect()
}
