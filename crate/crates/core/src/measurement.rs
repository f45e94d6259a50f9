//! The statistical formula, moral collapse and sequential measurement.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::{
    check_dim, pvm_from_hermitian, DensityMatrix, HermitianOperator, OutcomeSet,
    ProjectionValuedMeasure, Projector, StateVector,
};
use crate::linalg::{self, c, CMatrix};

/// Normalised probabilities at or below this are treated as impossible outcomes.
pub const ZERO_PROBABILITY: f64 = 1e-12;

/// Anything the statistical formula can be evaluated on.
pub trait QuantumState {
    fn dim(&self) -> usize;
    /// Probability that the assertion `P` holds.
    fn probability(&self, p: &Projector) -> f64;
}

impl QuantumState for StateVector {
    fn dim(&self) -> usize {
        StateVector::dim(self)
    }

    /// `⟨ψ|P|ψ⟩ / ⟨ψ|ψ⟩`.
    fn probability(&self, p: &Projector) -> f64 {
        let v = self.amplitudes();
        let pv = p.matrix() * v;
        linalg::inner(v, &pv).re / self.norm_sqr()
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    /// `Tr(ρ̂ P̂)`.
    fn probability(&self, p: &Projector) -> f64 {
        linalg::trace(&(self.matrix() * p.matrix())).re
    }
}

/// Probability of obtaining a value in `omega` when measuring `a`.
pub fn outcome_probability<S: QuantumState>(
    state: &S,
    a: &HermitianOperator,
    omega: &OutcomeSet,
) -> Result<f64> {
    check_dim(a.dim(), state.dim())?;
    let pvm = pvm_from_hermitian(a)?;
    Ok(projector_probability(state, &pvm.projector_for(omega)))
}

/// Probability of an assertion given directly as a projector.
pub fn projector_probability<S: QuantumState>(state: &S, p: &Projector) -> f64 {
    state.probability(p).clamp(0.0, 1.0)
}

/// Moral collapse `P̂_Ω|ψ⟩ / ‖P̂_Ω|ψ⟩‖`.
pub fn collapse_moral(
    psi: &StateVector,
    a: &HermitianOperator,
    omega: &OutcomeSet,
) -> Result<StateVector> {
    check_dim(a.dim(), psi.dim())?;
    let pvm = pvm_from_hermitian(a)?;
    collapse_onto(psi, &pvm.projector_for(omega))
}

/// Moral collapse onto an explicit projector.
pub fn collapse_onto(psi: &StateVector, p: &Projector) -> Result<StateVector> {
    check_dim(p.dim(), psi.dim())?;
    let prob = psi.probability(p);
    if prob <= ZERO_PROBABILITY {
        return Err(Error::ZeroProbability(prob));
    }
    Ok(psi.apply(p.matrix())?.normalized())
}

/// `ρ' = P̂_a ρ P̂_a / Tr(ρ P̂_a)` for the eigenvalue `value` of `a`.
pub fn collapse_density(
    rho: &DensityMatrix,
    a: &HermitianOperator,
    value: f64,
) -> Result<DensityMatrix> {
    check_dim(a.dim(), rho.dim())?;
    let pvm = pvm_from_hermitian(a)?;
    collapse_density_onto(rho, &pvm.projector_for(&OutcomeSet::point(value)))
}

pub fn collapse_density_onto(rho: &DensityMatrix, p: &Projector) -> Result<DensityMatrix> {
    check_dim(p.dim(), rho.dim())?;
    let prob = rho.probability(p);
    if prob <= ZERO_PROBABILITY {
        return Err(Error::ZeroProbability(prob));
    }
    let m = p.matrix() * rho.matrix() * p.matrix() / c(prob, 0.0);
    DensityMatrix::new(linalg::symmetrize(&m))
}

/// Seeded source of uniform variates; identical seeds give identical streams.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub const ALGORITHM: &'static str = "ChaCha8";

    pub fn new(seed: u64) -> Self {
        Self { seed, rng: crate::random::rng(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn algorithm(&self) -> &'static str {
        Self::ALGORITHM
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Inverse-CDF selection over a fixed ordering of weights.
pub fn sample_index(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_nonzero = i;
        }
        acc += w;
        if target < acc {
            return i;
        }
    }
    last_nonzero
}

/// One observable in a measurement sequence.
#[derive(Clone, Debug)]
pub struct MeasurementStep {
    pub observable: HermitianOperator,
    /// Outcome sets to distinguish; `None` means one outcome per eigenvalue.
    pub outcomes: Option<Vec<OutcomeSet>>,
}

impl MeasurementStep {
    pub fn finest(observable: HermitianOperator) -> Self {
        Self { observable, outcomes: None }
    }
}

/// Post-measurement state.
#[derive(Clone, Debug)]
pub enum PostState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    /// The eigenvalue, or `⟨A⟩` in the post state when the set holds several.
    pub value: f64,
    pub outcome_set: OutcomeSet,
    pub probability: f64,
    pub post_state: PostState,
}

#[derive(Clone, Debug)]
pub struct SequenceResult {
    pub outcomes: Vec<MeasurementOutcome>,
    pub final_state: StateVector,
}

fn outcome_sets(step: &MeasurementStep, pvm: &ProjectionValuedMeasure) -> Result<Vec<OutcomeSet>> {
    match &step.outcomes {
        None => Ok(pvm.eigenvalues().into_iter().map(OutcomeSet::point).collect()),
        Some(sets) => {
            for e in pvm.entries() {
                let hits = sets.iter().filter(|s| s.contains(e.eigenvalue)).count();
                if hits != 1 {
                    return Err(Error::InvalidArgument(format!(
                        "eigenvalue {} covered by {hits} outcome sets",
                        e.eigenvalue
                    )));
                }
            }
            Ok(sets.clone())
        }
    }
}

/// Measure each step in turn, sampling outcomes and collapsing morally.
pub fn measure_sequence(
    state: &StateVector,
    steps: &[MeasurementStep],
    rng: &mut RandomSource,
) -> Result<SequenceResult> {
    let mut current = state.normalized();
    let mut outcomes = Vec::with_capacity(steps.len());
    for step in steps {
        check_dim(step.observable.dim(), current.dim())?;
        let pvm = pvm_from_hermitian(&step.observable)?;
        let sets = outcome_sets(step, &pvm)?;
        let projectors: Vec<Projector> = sets.iter().map(|s| pvm.projector_for(s)).collect();
        let weights: Vec<f64> = projectors.iter().map(|p| projector_probability(&current, p)).collect();
        let k = sample_index(&weights, rng.uniform());
        let post = collapse_onto(&current, &projectors[k])?;
        let value = {
            let inside: Vec<f64> = pvm
                .eigenvalues()
                .into_iter()
                .filter(|&v| sets[k].contains(v))
                .collect();
            if inside.len() == 1 {
                inside[0]
            } else {
                post.expectation(step.observable.matrix())?.re
            }
        };
        outcomes.push(MeasurementOutcome {
            value,
            outcome_set: sets[k].clone(),
            probability: weights[k],
            post_state: PostState::Pure(post.clone()),
        });
        current = post;
    }
    Ok(SequenceResult { outcomes, final_state: current })
}

/// Unitary on `pointer ⊗ system` taking `|χ⟩|φ⟩ ↦ |χ_i⟩|φ⟩` for `φ ∈ range P_i`.
///
/// Pointer slot 0 is the ready state `|χ⟩`; slot `i + 1` records entry `i`
/// of the PVM. The construction is `Σ_i T_i ⊗ P_i` with `T_i` the
/// transposition of pointer slots 0 and `i + 1`.
pub fn build_measurement_unitary(
    system_dim: usize,
    pointer_dim: usize,
    pvm: &ProjectionValuedMeasure,
) -> Result<CMatrix> {
    check_dim(system_dim, pvm.dim())?;
    let needed = pvm.len() + 1;
    if pointer_dim < needed {
        return Err(Error::InsufficientPointerDimension { needed, got: pointer_dim });
    }
    let mut u = CMatrix::zeros(pointer_dim * system_dim, pointer_dim * system_dim);
    for (i, e) in pvm.entries().iter().enumerate() {
        let t = transposition(pointer_dim, 0, i + 1);
        u += linalg::kron(&t, e.projector.matrix());
    }
    Ok(u)
}

/// Unitary on `record ⊗ system` taking `|0⟩|φ⟩ ↦ |i⟩|φ⟩` for `φ ∈ range P_i`.
///
/// Unlike [`build_measurement_unitary`] there is no separate ready slot:
/// the record is cyclically shifted by `i`, so a qubit suffices for a
/// two-outcome PVM.
pub fn build_record_unitary(record_dim: usize, pvm: &ProjectionValuedMeasure) -> Result<CMatrix> {
    if record_dim < pvm.len() {
        return Err(Error::InsufficientPointerDimension { needed: pvm.len(), got: record_dim });
    }
    let system_dim = pvm.dim();
    let mut u = CMatrix::zeros(record_dim * system_dim, record_dim * system_dim);
    for (i, e) in pvm.entries().iter().enumerate() {
        let shift = CMatrix::from_fn(record_dim, record_dim, |r, s| {
            if r == (s + i) % record_dim {
                linalg::ONE
            } else {
                linalg::ZERO
            }
        });
        u += linalg::kron(&shift, e.projector.matrix());
    }
    Ok(u)
}

fn transposition(dim: usize, a: usize, b: usize) -> CMatrix {
    let mut t = linalg::identity(dim);
    if a != b {
        t[(a, a)] = linalg::ZERO;
        t[(b, b)] = linalg::ZERO;
        t[(a, b)] = linalg::ONE;
        t[(b, a)] = linalg::ONE;
    }
    t
}

/// `max |U†U − 1|`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    linalg::max_abs_diff(&(u.adjoint() * u), &linalg::identity(u.nrows()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{spin, spin_half_operators, Tensor};
    use crate::linalg::max_abs_diff;
    use crate::random::{random_density, random_hermitian, random_ket, random_projector, rng};

    #[test]
    fn sigma_y_on_z_up_is_half() {
        let (_, sy, _) = spin_half_operators();
        let p = outcome_probability(&spin::z_up(), &sy, &OutcomeSet::point(1.0)).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eigenstate_probability_one() {
        let (sx, _, _) = spin_half_operators();
        let p = outcome_probability(&spin::x_down(), &sx, &OutcomeSet::closed(-2.0, 0.0)).unwrap();
        assert!((p - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unnormalised_state_same_probability() {
        let (sx, _, _) = spin_half_operators();
        let omega = OutcomeSet::point(1.0);
        let two_up = spin::z_up().scaled(c(2.0, 0.0)).unwrap();
        let a = outcome_probability(&spin::z_up(), &sx, &omega).unwrap();
        let b = outcome_probability(&two_up, &sx, &omega).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn empty_overlap_is_zero() {
        let (_, _, sz) = spin_half_operators();
        let p = outcome_probability(&spin::x_up(), &sz, &OutcomeSet::point(0.3)).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn collapse_x_up_on_z() {
        let (_, _, sz) = spin_half_operators();
        let post = collapse_moral(&spin::x_up(), &sz, &OutcomeSet::point(1.0)).unwrap();
        let overlap = post.inner(&spin::z_up()).unwrap().norm();
        assert!((overlap - 1.0).abs() < 1e-14);
        let again = outcome_probability(&post, &sz, &OutcomeSet::point(1.0)).unwrap();
        assert!((again - 1.0).abs() < 1e-10);
    }

    #[test]
    fn collapse_eigenstate_unchanged() {
        let (sx, _, _) = spin_half_operators();
        let psi = spin::x_up().scaled(c(0.0, 3.0)).unwrap();
        let post = collapse_moral(&psi, &sx, &OutcomeSet::point(1.0)).unwrap();
        assert!(max_abs_diff(&post.outer(), &psi.normalized().outer()) < 1e-14);
    }

    #[test]
    fn collapse_orthogonal_is_error() {
        let (_, _, sz) = spin_half_operators();
        let r = collapse_moral(&spin::z_up(), &sz, &OutcomeSet::point(-1.0));
        assert!(matches!(r, Err(Error::ZeroProbability(_))));
    }

    #[test]
    fn collapse_density_cases() {
        let (_, _, sz) = spin_half_operators();
        let rho = collapse_density(&DensityMatrix::maximally_mixed(2), &sz, 1.0).unwrap();
        assert!(max_abs_diff(rho.matrix(), &spin::z_up().outer()) < 1e-15);

        let psi = random_ket(&mut rng(2), 2);
        let pure = DensityMatrix::pure(&psi);
        let via_density = collapse_density(&pure, &sz, -1.0).unwrap();
        let via_ket = collapse_moral(&psi, &sz, &OutcomeSet::point(-1.0)).unwrap();
        assert!(max_abs_diff(via_density.matrix(), &via_ket.outer()) < 1e-10);
    }

    #[test]
    fn collapse_density_random_qutrit_rank_two() {
        let mut r = rng(9);
        let rho = random_density(&mut r, 3);
        let p = random_projector(&mut r, 3, 2);
        let post = collapse_density_onto(&rho, &p).unwrap();
        assert!((linalg::trace(post.matrix()).re - 1.0).abs() < 1e-10);
        assert!(post.eigenvalues()[0] >= -1e-10);
        // supported inside range(P)
        assert!(max_abs_diff(&(p.matrix() * post.matrix() * p.matrix()), post.matrix()) < 1e-12);
    }

    #[test]
    fn repeated_measurement_agrees() {
        let (_, _, sz) = spin_half_operators();
        let mut src = RandomSource::new(4);
        for _ in 0..50 {
            let psi = random_ket(src.rng_mut(), 2);
            let steps = vec![MeasurementStep::finest(sz.clone()), MeasurementStep::finest(sz.clone())];
            let out = measure_sequence(&psi, &steps, &mut src).unwrap();
            assert_eq!(out.outcomes[0].value, out.outcomes[1].value);
            assert!((out.outcomes[1].probability - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn commuting_observables_preserve_first_value() {
        let mut r = rng(12);
        let a = random_hermitian(&mut r, 2).tensor(&crate::HermitianOperator::identity(2));
        let b = crate::HermitianOperator::identity(2).tensor(&random_hermitian(&mut r, 2));
        let mut src = RandomSource::new(5);
        for _ in 0..50 {
            let psi = random_ket(src.rng_mut(), 4);
            let steps = vec![
                MeasurementStep::finest(a.clone()),
                MeasurementStep::finest(b.clone()),
                MeasurementStep::finest(a.clone()),
            ];
            let out = measure_sequence(&psi, &steps, &mut src).unwrap();
            assert!((out.outcomes[0].value - out.outcomes[2].value).abs() < 1e-12);
        }
    }

    #[test]
    fn sequence_is_deterministic_per_seed() {
        let (sx, _, sz) = spin_half_operators();
        let steps = vec![
            MeasurementStep::finest(sz.clone()),
            MeasurementStep::finest(sx.clone()),
            MeasurementStep::finest(sz),
        ];
        let run = |seed| {
            let mut src = RandomSource::new(seed);
            (0..100)
                .map(|_| {
                    measure_sequence(&spin::y_up(), &steps, &mut src)
                        .unwrap()
                        .outcomes
                        .iter()
                        .map(|o| o.value)
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(77), run(77));
        assert_ne!(run(77), run(78));
    }

    #[test]
    fn binomial_frequency_within_three_sigma() {
        let (_, _, sz) = spin_half_operators();
        let steps = vec![MeasurementStep::finest(sz)];
        let mut src = RandomSource::new(2024);
        let n = 100_000;
        let ups = (0..n)
            .filter(|_| measure_sequence(&spin::x_up(), &steps, &mut src).unwrap().outcomes[0].value > 0.0)
            .count();
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((ups as f64 - n as f64 * 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn coarse_outcome_sets_validated() {
        let a = crate::HermitianOperator::from_real_rows(3, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        let step = MeasurementStep {
            observable: a.clone(),
            outcomes: Some(vec![OutcomeSet::closed(-0.5, 1.5), OutcomeSet::point(2.0)]),
        };
        let psi = StateVector::from_real(&[1.0, 1.0, 0.0]).unwrap();
        let out = measure_sequence(&psi, &[step], &mut RandomSource::new(1)).unwrap();
        assert!((out.outcomes[0].value - 0.5).abs() < 1e-12);
        let bad = MeasurementStep { observable: a, outcomes: Some(vec![OutcomeSet::point(2.0)]) };
        assert!(measure_sequence(&psi, &[bad], &mut RandomSource::new(1)).is_err());
    }

    #[test]
    fn measurement_unitary_properties() {
        let (_, _, sz) = spin_half_operators();
        let pvm = pvm_from_hermitian(&sz).unwrap();
        let u = build_measurement_unitary(2, 3, &pvm).unwrap();
        assert!(unitarity_error(&u) < 1e-10);
        let ready = StateVector::basis(3, 0).unwrap();
        // entry 0 is σ_z = −1 (|↓⟩), entry 1 is +1 (|↑⟩)
        let out = ready.tensor(&spin::z_down()).apply(&u).unwrap();
        let expect = StateVector::basis(3, 1).unwrap().tensor(&spin::z_down());
        assert_eq!(out.amplitudes(), expect.amplitudes());

        let sup = ready.tensor(&spin::x_up()).apply(&u).unwrap();
        let branch_up = StateVector::basis(3, 2).unwrap().tensor(&spin::z_up());
        let branch_down = StateVector::basis(3, 1).unwrap().tensor(&spin::z_down());
        let expected = branch_up.add(&branch_down).unwrap().scaled(c(0.5f64.sqrt(), 0.0)).unwrap();
        assert!((sup.amplitudes() - expected.amplitudes()).norm() < 1e-15);
        assert!(!crate::is_product_state(&sup, (3, 2)).unwrap().is_product);
    }

    #[test]
    fn pointer_too_small() {
        let (_, _, sz) = spin_half_operators();
        let pvm = pvm_from_hermitian(&sz).unwrap();
        assert!(matches!(
            build_measurement_unitary(2, 2, &pvm),
            Err(Error::InsufficientPointerDimension { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn record_unitary_on_qubit() {
        let (_, _, sz) = spin_half_operators();
        let pvm = pvm_from_hermitian(&sz).unwrap();
        let u = build_record_unitary(2, &pvm).unwrap();
        assert!(unitarity_error(&u) < 1e-14);
        let out = StateVector::basis(2, 0).unwrap().tensor(&spin::z_down()).apply(&u).unwrap();
        assert_eq!(out.amplitudes(), StateVector::basis(2, 0).unwrap().tensor(&spin::z_down()).amplitudes());
        let out = StateVector::basis(2, 0).unwrap().tensor(&spin::z_up()).apply(&u).unwrap();
        assert_eq!(out.amplitudes(), StateVector::basis(2, 1).unwrap().tensor(&spin::z_up()).amplitudes());
    }
}
