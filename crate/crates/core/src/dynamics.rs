//! Constant-Hamiltonian time evolution in the Schrödinger and Heisenberg pictures.

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, pvm_from_hermitian, DensityMatrix, HermitianOperator, OutcomeSet, StateVector};
use crate::linalg::{self, C64, CMatrix};
use crate::measurement::projector_probability;

/// Hamiltonian, ħ and elapsed time.
#[derive(Clone, Debug)]
pub struct EvolutionSpec {
    hamiltonian: HermitianOperator,
    hbar: f64,
    time: f64,
}

impl EvolutionSpec {
    pub fn new(hamiltonian: HermitianOperator, hbar: f64, time: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidArgument(format!("hbar must be positive, got {hbar}")));
        }
        if !time.is_finite() {
            return Err(Error::InvalidArgument("time must be finite".into()));
        }
        Ok(Self { hamiltonian, hbar, time })
    }

    /// ħ = 1.
    pub fn natural(hamiltonian: HermitianOperator, time: f64) -> Self {
        Self::new(hamiltonian, 1.0, time).expect("finite time")
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn at_time(&self, time: f64) -> Self {
        Self { time, ..self.clone() }
    }

    /// `exp(−iĤt/ħ)`.
    pub fn propagator(&self) -> CMatrix {
        let s = -self.time / self.hbar;
        linalg::hermitian_function(self.hamiltonian.matrix(), |e| C64::from_polar(1.0, s * e))
    }
}

pub fn evolve_state(spec: &EvolutionSpec, psi: &StateVector) -> Result<StateVector> {
    check_dim(spec.dim(), psi.dim())?;
    psi.apply(&spec.propagator())
}

pub fn evolve_density(spec: &EvolutionSpec, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_dim(spec.dim(), rho.dim())?;
    let u = spec.propagator();
    DensityMatrix::new(linalg::symmetrize(&(&u * rho.matrix() * u.adjoint())))
}

/// `Â_H(t) = e^{iĤt/ħ} Â e^{−iĤt/ħ}`.
pub fn heisenberg_operator(spec: &EvolutionSpec, a: &HermitianOperator) -> Result<HermitianOperator> {
    check_dim(spec.dim(), a.dim())?;
    let u = spec.propagator();
    HermitianOperator::new(linalg::symmetrize(&(u.adjoint() * a.matrix() * &u)))
}

/// Probability of `Ω` for `A` measured at time `t`, once per picture.
///
/// Returns `(schrödinger, heisenberg)`.
pub fn picture_equivalence_check(
    spec: &EvolutionSpec,
    psi: &StateVector,
    a: &HermitianOperator,
    omega: &OutcomeSet,
) -> Result<(f64, f64)> {
    check_dim(spec.dim(), psi.dim())?;
    check_dim(spec.dim(), a.dim())?;
    let psi_t = evolve_state(spec, psi)?;
    let schrodinger = projector_probability(&psi_t, &pvm_from_hermitian(a)?.projector_for(omega));
    let a_h = heisenberg_operator(spec, a)?;
    let heisenberg = projector_probability(psi, &pvm_from_hermitian(&a_h)?.projector_for(omega));
    Ok((schrodinger, heisenberg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{spin, spin_half_operators, Projector};
    use crate::linalg::{c, commutator, max_abs_diff};
    use crate::measurement::{collapse_onto, QuantumState};
    use crate::random::{random_density, random_hermitian, random_ket, rng};
    use std::f64::consts::PI;

    #[test]
    fn zero_hamiltonian_is_identity() {
        let psi = random_ket(&mut rng(1), 3);
        let spec = EvolutionSpec::natural(HermitianOperator::zero(3), 4.2);
        assert_eq!(evolve_state(&spec, &psi).unwrap().amplitudes(), psi.amplitudes());
    }

    #[test]
    fn sigma_z_full_period() {
        let (_, _, sz) = spin_half_operators();
        let spec = EvolutionSpec::natural(sz, PI);
        let out = evolve_state(&spec, &spin::x_up()).unwrap();
        let overlap = spin::x_up().inner(&out).unwrap().norm_sqr() / out.norm_sqr();
        assert!((overlap - 1.0).abs() < 1e-12);
        // closed form: diag(e^{−iπ}, e^{iπ}) = −1
        let expected = spin::x_up().scaled(c(-1.0, 0.0)).unwrap();
        assert!((out.amplitudes() - expected.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn round_trip() {
        let mut r = rng(3);
        let h = random_hermitian(&mut r, 5);
        let psi = random_ket(&mut r, 5);
        let fwd = evolve_state(&EvolutionSpec::natural(h.clone(), 1.7), &psi).unwrap();
        let back = evolve_state(&EvolutionSpec::natural(h, -1.7), &fwd).unwrap();
        assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-9);
    }

    #[test]
    fn hbar_scales_time() {
        let mut r = rng(4);
        let h = random_hermitian(&mut r, 3);
        let psi = random_ket(&mut r, 3);
        let a = evolve_state(&EvolutionSpec::new(h.clone(), 2.0, 1.0).unwrap(), &psi).unwrap();
        let b = evolve_state(&EvolutionSpec::natural(h, 0.5), &psi).unwrap();
        assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-12);
        assert!(EvolutionSpec::new(HermitianOperator::zero(2), 0.0, 1.0).is_err());
    }

    #[test]
    fn maximally_mixed_is_stationary() {
        let h = random_hermitian(&mut rng(5), 4);
        let rho = DensityMatrix::maximally_mixed(4);
        let out = evolve_density(&EvolutionSpec::natural(h, 3.0), &rho).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn pure_density_matches_ket() {
        let mut r = rng(6);
        let h = random_hermitian(&mut r, 3);
        let psi = random_ket(&mut r, 3).normalized();
        let spec = EvolutionSpec::natural(h, 0.8);
        let rho_t = evolve_density(&spec, &DensityMatrix::pure(&psi)).unwrap();
        let psi_t = evolve_state(&spec, &psi).unwrap();
        assert!(max_abs_diff(rho_t.matrix(), &psi_t.outer()) < 1e-10);
    }

    #[test]
    fn von_neumann_finite_difference() {
        let mut r = rng(7);
        let h = random_hermitian(&mut r, 3);
        let rho = random_density(&mut r, 3);
        let dt = 1e-5;
        let plus = evolve_density(&EvolutionSpec::natural(h.clone(), dt), &rho).unwrap();
        let minus = evolve_density(&EvolutionSpec::natural(h.clone(), -dt), &rho).unwrap();
        let fd = (plus.matrix() - minus.matrix()) / c(2.0 * dt, 0.0);
        let exact = commutator(h.matrix(), rho.matrix()) / linalg::I;
        assert!(max_abs_diff(&fd, &exact) < 1e-6);
    }

    #[test]
    fn density_preserves_trace_and_spectrum() {
        let mut r = rng(8);
        let h = random_hermitian(&mut r, 4);
        let rho = random_density(&mut r, 4);
        let out = evolve_density(&EvolutionSpec::natural(h, 2.5), &rho).unwrap();
        assert!((linalg::trace(out.matrix()).re - 1.0).abs() < 1e-10);
        for (x, y) in out.eigenvalues().iter().zip(rho.eigenvalues()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn heisenberg_cases() {
        let mut r = rng(9);
        let h = random_hermitian(&mut r, 3);
        let a = random_hermitian(&mut r, 3);
        let at0 = heisenberg_operator(&EvolutionSpec::natural(h.clone(), 0.0), &a).unwrap();
        assert!(max_abs_diff(at0.matrix(), a.matrix()) < 1e-12);

        // any function of Ĥ commutes with it
        let conserved = HermitianOperator::new(h.matrix() * h.matrix()).unwrap();
        let out = heisenberg_operator(&EvolutionSpec::natural(h.clone(), 5.0), &conserved).unwrap();
        assert!(max_abs_diff(out.matrix(), conserved.matrix()) < 1e-10);

        let t = 0.6;
        let dt = 1e-5;
        let at = |s: f64| heisenberg_operator(&EvolutionSpec::natural(h.clone(), s), &a).unwrap();
        let fd = (at(t + dt).matrix() - at(t - dt).matrix()) / c(2.0 * dt, 0.0);
        let exact = commutator(h.matrix(), at(t).matrix()) * linalg::I;
        assert!(max_abs_diff(&fd, &exact) < 1e-6);
    }

    #[test]
    fn heisenberg_spectrum_invariant() {
        let mut r = rng(10);
        let h = random_hermitian(&mut r, 5);
        let a = random_hermitian(&mut r, 5);
        let out = heisenberg_operator(&EvolutionSpec::natural(h, -3.3), &a).unwrap();
        for (x, y) in out.spectrum().iter().zip(a.spectrum()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn pictures_agree() {
        let (sx, _, sz) = spin_half_operators();
        let omega = OutcomeSet::point(1.0);
        let (s0, h0) = picture_equivalence_check(&EvolutionSpec::natural(sz.clone(), 0.0), &spin::y_up(), &sx, &omega).unwrap();
        let static_p = crate::measurement::outcome_probability(&spin::y_up(), &sx, &omega).unwrap();
        assert!((s0 - static_p).abs() < 1e-12 && (h0 - static_p).abs() < 1e-12);

        let (s, h) = picture_equivalence_check(&EvolutionSpec::natural(sz, 0.4), &spin::x_up(), &sx, &omega).unwrap();
        assert!((s - h).abs() < 1e-10);
        // precession at angular frequency 2: cos²(t)
        assert!((s - 0.4f64.cos().powi(2)).abs() < 1e-12);

        let mut r = rng(11);
        let h4 = random_hermitian(&mut r, 4);
        let a4 = random_hermitian(&mut r, 4);
        let psi = random_ket(&mut r, 4);
        let lo = a4.spectrum()[1];
        let (s, h) = picture_equivalence_check(&EvolutionSpec::natural(h4, 1.3), &psi, &a4, &OutcomeSet::closed(lo, 1e3)).unwrap();
        assert!((s - h).abs() < 1e-10);
    }

    #[test]
    fn collapse_commutes_with_picture_change() {
        let mut r = rng(12);
        let h = random_hermitian(&mut r, 4);
        let a = random_hermitian(&mut r, 4);
        let psi = random_ket(&mut r, 4);
        let spec = EvolutionSpec::natural(h.clone(), 0.9);
        let omega = OutcomeSet::closed(a.spectrum()[2], 1e3);

        let psi_t = evolve_state(&spec, &psi).unwrap();
        let p_s = pvm_from_hermitian(&a).unwrap().projector_for(&omega);
        let collapsed_s = collapse_onto(&psi_t, &p_s).unwrap();

        let a_h = heisenberg_operator(&spec, &a).unwrap();
        let p_h = pvm_from_hermitian(&a_h).unwrap().projector_for(&omega);
        let collapsed_h = collapse_onto(&psi, &p_h).unwrap();

        let u_dag = spec.propagator().adjoint();
        let pulled_back = collapsed_s.apply(&u_dag).unwrap();
        let d = Projector::onto_state(&pulled_back).distance(&Projector::onto_state(&collapsed_h));
        assert!(d < 1e-9);
        assert!((psi_t.probability(&p_s) - psi.probability(&p_h)).abs() < 1e-10);
    }

    #[test]
    fn dimension_mismatch() {
        let spec = EvolutionSpec::natural(HermitianOperator::zero(2), 1.0);
        assert!(matches!(
            evolve_state(&spec, &random_ket(&mut rng(1), 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
