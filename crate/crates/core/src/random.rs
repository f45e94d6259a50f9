//! Seeded generators for random kets, operators and states.
//!
//! All draws go through `ChaCha8Rng` so every instance is reproducible from
//! its seed. The distributions are simple (Gaussian entries, not Haar) and
//! intended for property tests and demo scenarios.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hilbert::{DensityMatrix, HermitianOperator, Projector, StateVector};
use crate::linalg::{self, c, CMatrix, CVector, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal draw via Box–Muller.
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(normal(rng), normal(rng))
}

pub fn random_ket<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
        if let Ok(psi) = StateVector::new(v) {
            return psi;
        }
    }
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let a = random_matrix(rng, dim);
    HermitianOperator::new(linalg::symmetrize(&a)).expect("symmetrised matrix is Hermitian")
}

pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let a = random_matrix(rng, dim);
    let m = &a * a.adjoint();
    let tr = linalg::trace(&m).re;
    DensityMatrix::new(m / c(tr, 0.0)).expect("A A† / Tr is a density matrix")
}

/// `exp(iH)` for a random Hermitian `H`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let h = random_hermitian(rng, dim);
    linalg::hermitian_function(h.matrix(), |x| C64::from_polar(1.0, x))
}

/// Orthonormal basis given by the columns of a random unitary.
pub fn random_basis<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<CVector> {
    let u = random_unitary(rng, dim);
    (0..dim).map(|k| u.column(k).into_owned()).collect()
}

pub fn random_projector<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Projector {
    let u = random_unitary(rng, dim);
    let basis = u.columns(0, rank).into_owned();
    Projector::new(linalg::projector_from_basis(&basis)).expect("basis projector")
}
