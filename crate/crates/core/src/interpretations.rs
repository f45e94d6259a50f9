//! Scenario engines for the interpretations: cat and decoherence, EPR,
//! many-worlds branching, many-minds transitions, consistent-history
//! sampling and true/reliable fact classification.

use serde::Serialize;

use crate::dynamics::EvolutionSpec;
use crate::error::{Error, Result};
use crate::histories::{classify_consistency, decoherence_matrix, AlternativeSet, Consistency, History};
use crate::hilbert::{
    check_dim, pvm_from_hermitian, spin, spin_half_operators, DensityMatrix, HermitianOperator, OutcomeSet,
    ProjectionValuedMeasure, Projector, StateVector, Tensor,
};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::measurement::{
    build_measurement_unitary, build_record_unitary, collapse_onto, measure_sequence, projector_probability,
    sample_index, MeasurementStep, RandomSource,
};

// ---------------------------------------------------------------- cat

#[derive(Clone, Debug, Serialize)]
pub struct CatReport {
    pub include_environment: bool,
    /// Probabilities of the four cat–electron Bell-type states.
    pub bell_probabilities: [f64; 4],
    pub marginal_up: f64,
    pub marginal_down: f64,
    /// The same four probabilities if the cat's reading collapses the state.
    pub collapse_at_cat: [f64; 4],
}

/// Pointer slots: 0 ready, 1 wrote "down", 2 wrote "up".
const CAT_DIM: usize = 3;
const WROTE_DOWN: usize = 1;
const WROTE_UP: usize = 2;

fn cat_bell_states() -> Vec<CVector> {
    let cat = |k| StateVector::basis(CAT_DIM, k).expect("slot");
    let up = cat(WROTE_UP);
    let down = cat(WROTE_DOWN);
    let s = 0.5f64.sqrt();
    let comb = |a: &StateVector, b: &StateVector, sign: f64| {
        (a.amplitudes() + b.amplitudes() * c(sign, 0.0)) * c(s, 0.0)
    };
    let uu = up.tensor(&spin::z_up());
    let dd = down.tensor(&spin::z_down());
    let ud = up.tensor(&spin::z_down());
    let du = down.tensor(&spin::z_up());
    vec![comb(&uu, &dd, 1.0), comb(&uu, &dd, -1.0), comb(&ud, &du, 1.0), comb(&ud, &du, -1.0)]
}

/// A cat measures σ̂_z of an electron in `(|↑⟩ + |↓⟩)/√2`; an outside
/// observer then checks the joint state in a Bell-type basis.
pub fn cat_experiment(include_environment: bool) -> Result<CatReport> {
    let (_, _, sz) = spin_half_operators();
    let pvm = pvm_from_hermitian(&sz)?;
    let u = build_measurement_unitary(2, CAT_DIM, &pvm)?;
    let electron = StateVector::from_real(&[1.0, 1.0])?;
    let joint = StateVector::basis(CAT_DIM, 0)?.tensor(&electron).apply(&u)?.normalized();

    let env_dim = if include_environment { 2 } else { 1 };
    let state = if include_environment {
        // |d⟩ or |u⟩ according to what the cat wrote
        let wrote_up = Projector::onto_state(&StateVector::basis(CAT_DIM, WROTE_UP)?);
        let cat_pvm = ProjectionValuedMeasure::from_entries(vec![(0.0, wrote_up.complement()), (1.0, wrote_up)])?;
        let record = linalg::kron(&build_record_unitary(2, &cat_pvm)?, &linalg::identity(2));
        StateVector::basis(2, 0)?.tensor(&joint).apply(&record)?
    } else {
        joint
    };
    let rho = DensityMatrix::pure(&state);

    let lift = |p: &CMatrix| Projector::new(linalg::kron(&linalg::identity(env_dim), p)).expect("lifted projector");
    let bells: Vec<Projector> = cat_bell_states().iter().map(|b| lift(&linalg::outer(b, b))).collect();
    let mut bell_probabilities = [0.0; 4];
    for (k, p) in bells.iter().enumerate() {
        bell_probabilities[k] = projector_probability(&rho, p);
    }
    let electron_up = lift(&linalg::kron(&linalg::identity(CAT_DIM), &spin::z_up().outer()));
    let marginal_up = projector_probability(&rho, &electron_up);
    let marginal_down = projector_probability(&rho, &electron_up.complement());

    // Collapse at the cat: mix the two moral collapses on what it wrote.
    let mut collapse_at_cat = [0.0; 4];
    for slot in [WROTE_DOWN, WROTE_UP] {
        let wrote = lift(&linalg::kron(&StateVector::basis(CAT_DIM, slot)?.outer(), &linalg::identity(2)));
        let weight = projector_probability(&rho, &wrote);
        if weight > 0.0 {
            let post = collapse_onto(&state, &wrote)?;
            for (k, p) in bells.iter().enumerate() {
                collapse_at_cat[k] += weight * projector_probability(&post, p);
            }
        }
    }
    Ok(CatReport { include_environment, bell_probabilities, marginal_up, marginal_down, collapse_at_cat })
}

// ---------------------------------------------------------------- EPR

#[derive(Clone, Debug, Serialize)]
pub struct EprReport {
    pub n_runs: usize,
    pub wing_b_first: bool,
    pub anticorrelated_runs: usize,
    pub wing_a_up_frequency: f64,
    pub wing_b_up_frequency: f64,
}

impl EprReport {
    pub fn all_anticorrelated(&self) -> bool {
        self.anticorrelated_runs == self.n_runs
    }
}

/// `(|↑⟩|↓⟩ + |↓⟩|↑⟩)/√2`.
pub fn epr_state() -> StateVector {
    spin::z_up()
        .tensor(&spin::z_down())
        .add(&spin::z_down().tensor(&spin::z_up()))
        .expect("same dimension")
        .normalized()
}

/// σ̂_z on both wings of the EPR pair, `n_runs` times.
pub fn epr_correlation(n_runs: usize, rng: &mut RandomSource, wing_b_first: bool) -> Result<EprReport> {
    if n_runs == 0 {
        return Err(Error::InvalidArgument("n_runs must be at least 1".into()));
    }
    let (_, _, sz) = spin_half_operators();
    let id = HermitianOperator::identity(2);
    let a = MeasurementStep::finest(sz.tensor(&id));
    let b = MeasurementStep::finest(id.tensor(&sz));
    let steps = if wing_b_first { vec![b, a] } else { vec![a, b] };
    let psi = epr_state();
    let (mut anti, mut a_up, mut b_up) = (0, 0, 0);
    for _ in 0..n_runs {
        let out = measure_sequence(&psi, &steps, rng)?;
        let (va, vb) = if wing_b_first {
            (out.outcomes[1].value, out.outcomes[0].value)
        } else {
            (out.outcomes[0].value, out.outcomes[1].value)
        };
        if va * vb == -1.0 {
            anti += 1;
        }
        a_up += usize::from(va > 0.0);
        b_up += usize::from(vb > 0.0);
    }
    Ok(EprReport {
        n_runs,
        wing_b_first,
        anticorrelated_runs: anti,
        wing_a_up_frequency: a_up as f64 / n_runs as f64,
        wing_b_up_frequency: b_up as f64 / n_runs as f64,
    })
}

// ---------------------------------------------------------- many worlds

#[derive(Clone, Debug)]
pub struct BranchNode {
    pub time: f64,
    pub state: StateVector,
    /// `⟨ψ|ψ⟩` of the unnormalised branch state.
    pub measure: f64,
    pub parent: Option<usize>,
    /// Eigenvalue selected at the split that created this node.
    pub outcome: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct BranchTree {
    pub nodes: Vec<BranchNode>,
}

impl BranchTree {
    pub fn children(&self, id: usize) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&k| self.nodes[k].parent == Some(id)).collect()
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut has_child = vec![false; self.nodes.len()];
        for n in &self.nodes {
            if let Some(p) = n.parent {
                has_child[p] = true;
            }
        }
        (0..self.nodes.len()).filter(|&k| !has_child[k]).collect()
    }

    pub fn total_leaf_measure(&self) -> f64 {
        self.leaves().iter().map(|&k| self.nodes[k].measure).sum()
    }

    /// Outcomes along the path from the root to `id`.
    pub fn path_outcomes(&self, id: usize) -> Vec<f64> {
        let mut out = Vec::new();
        let mut cur = Some(id);
        while let Some(k) = cur {
            if let Some(v) = self.nodes[k].outcome {
                out.push(v);
            }
            cur = self.nodes[k].parent;
        }
        out.reverse();
        out
    }

    /// `(max |⟨child_i|child_j⟩|, max |Σ child measures − parent measure|)`.
    pub fn invariant_errors(&self) -> (f64, f64) {
        let mut ortho: f64 = 0.0;
        let mut conserve: f64 = 0.0;
        for id in 0..self.nodes.len() {
            let kids = self.children(id);
            if kids.is_empty() {
                continue;
            }
            for (i, &a) in kids.iter().enumerate() {
                for &b in &kids[i + 1..] {
                    let ov = self.nodes[a].state.inner(&self.nodes[b].state).expect("same dim").norm();
                    ortho = ortho.max(ov);
                }
            }
            let total: f64 = kids.iter().map(|&k| self.nodes[k].measure).sum();
            conserve = conserve.max((total - self.nodes[id].measure).abs());
        }
        (ortho, conserve)
    }
}

/// A split of every current world by a PVM at a given time.
#[derive(Clone, Debug)]
pub struct SplitEvent {
    pub time: f64,
    pub pvm: ProjectionValuedMeasure,
}

/// Children below this fraction of the root measure are dropped.
pub const ZERO_BRANCH: f64 = 1e-14;

/// Unfold the world tree: evolve leaves between splits, then split each
/// leaf into its orthogonal PVM components.
pub fn many_worlds_unfold(
    initial: &StateVector,
    schedule: &[SplitEvent],
    hamiltonian: &HermitianOperator,
    hbar: f64,
) -> Result<BranchTree> {
    check_dim(hamiltonian.dim(), initial.dim())?;
    let root_measure = initial.norm_sqr();
    let mut tree = BranchTree {
        nodes: vec![BranchNode { time: 0.0, state: initial.clone(), measure: root_measure, parent: None, outcome: None }],
    };
    let mut frontier = vec![0usize];
    let mut now = 0.0;
    for event in schedule {
        check_dim(initial.dim(), event.pvm.dim())?;
        if event.time < now {
            return Err(Error::InvalidArgument("split times must be non-decreasing from 0".into()));
        }
        let u = EvolutionSpec::new(hamiltonian.clone(), hbar, event.time - now)?.propagator();
        let mut next = Vec::new();
        for &leaf in &frontier {
            let evolved = tree.nodes[leaf].state.apply(&u)?;
            for e in event.pvm.entries() {
                let v = e.projector.matrix() * evolved.amplitudes();
                let measure = v.norm_squared();
                if measure <= ZERO_BRANCH * root_measure {
                    continue;
                }
                tree.nodes.push(BranchNode {
                    time: event.time,
                    state: StateVector::from_vector(v)?,
                    measure,
                    parent: Some(leaf),
                    outcome: Some(e.eigenvalue),
                });
                next.push(tree.nodes.len() - 1);
            }
        }
        frontier = next;
        now = event.time;
    }
    Ok(tree)
}

/// Total measure of worlds whose frequency of `+` outcomes lies within `eps`
/// of `p`, after `n` independent splits with weight `p` on `+`.
///
/// Computed exactly from the binomial distribution.
pub fn frequency_measure(n: u32, p: f64, eps: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..=n {
        if (k as f64 / n.max(1) as f64 - p).abs() <= eps + 1e-12 {
            total += binomial_pmf(n, k, p);
        }
    }
    total
}

fn binomial_pmf(n: u32, k: u32, p: f64) -> f64 {
    let mut log_choose = 0.0;
    for i in 0..k {
        log_choose += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    let q = 1.0 - p;
    let lp = if k == 0 { 0.0 } else { k as f64 * p.ln() };
    let lq = if k == n { 0.0 } else { (n - k) as f64 * q.ln() };
    (log_choose + lp + lq).exp()
}

/// The same measure read off an unfolded tree of `+1`/`−1` splits.
pub fn tree_frequency_measure(tree: &BranchTree, target: f64, eps: f64) -> f64 {
    let root = tree.nodes[0].measure;
    tree.leaves()
        .into_iter()
        .filter_map(|k| {
            let outs = tree.path_outcomes(k);
            if outs.is_empty() {
                return None;
            }
            let ups = outs.iter().filter(|&&v| v > 0.0).count();
            ((ups as f64 / outs.len() as f64 - target).abs() <= eps + 1e-12).then(|| tree.nodes[k].measure / root)
        })
        .sum()
}

/// `|x↑⟩^{⊗n}` split by σ̂_z on each qubit in turn, no dynamics.
pub fn spin_chain_unfold(n: usize) -> Result<BranchTree> {
    let (_, _, sz) = spin_half_operators();
    let id = HermitianOperator::identity(2);
    let dim = 1usize << n;
    let mut psi = spin::x_up();
    for _ in 1..n {
        psi = psi.tensor(&spin::x_up());
    }
    let schedule = (0..n)
        .map(|k| {
            let mut op = HermitianOperator::identity(1);
            for j in 0..n {
                op = op.tensor(if j == k { &sz } else { &id });
            }
            Ok(SplitEvent { time: k as f64, pvm: pvm_from_hermitian(&op)? })
        })
        .collect::<Result<Vec<_>>>()?;
    many_worlds_unfold(&psi, &schedule, &HermitianOperator::zero(dim), 1.0)
}

// ----------------------------------------------------------- many minds

#[derive(Clone, Debug)]
pub struct MindEnsemble {
    brain_states: Vec<StateVector>,
    occupancy: Vec<f64>,
}

impl MindEnsemble {
    pub fn new(brain_states: Vec<StateVector>, occupancy: Vec<f64>) -> Result<Self> {
        if brain_states.is_empty() {
            return Err(Error::Empty);
        }
        if occupancy.len() != brain_states.len() {
            return Err(Error::DimensionMismatch { expected: brain_states.len(), found: occupancy.len() });
        }
        let dim = brain_states[0].dim();
        let mut worst: f64 = 0.0;
        for (i, a) in brain_states.iter().enumerate() {
            check_dim(dim, a.dim())?;
            for (j, b) in brain_states.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b)? - c(target, 0.0)).norm());
            }
        }
        if worst > 1e-9 {
            return Err(Error::NotOrthonormal(worst));
        }
        if brain_states.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "brain basis has {} states for a {dim}-dimensional brain space",
                brain_states.len()
            )));
        }
        let total: f64 = occupancy.iter().sum();
        if occupancy.iter().any(|&w| w < -1e-12) || (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("occupancy must be a probability vector (sum {total})")));
        }
        Ok(Self { brain_states, occupancy })
    }

    /// Computational basis of a `dim`-dimensional brain, every mind in state 0.
    pub fn standard(dim: usize) -> Self {
        let brain_states = (0..dim).map(|k| StateVector::basis(dim, k).expect("k < dim")).collect();
        let mut occupancy = vec![0.0; dim];
        occupancy[0] = 1.0;
        Self { brain_states, occupancy }
    }

    pub fn brain_states(&self) -> &[StateVector] {
        &self.brain_states
    }

    pub fn occupancy(&self) -> &[f64] {
        &self.occupancy
    }

    pub fn brain_dim(&self) -> usize {
        self.brain_states[0].dim()
    }
}

/// Result of one many-minds step.
#[derive(Clone, Debug)]
pub struct MindStep {
    pub ensemble: MindEnsemble,
    /// `T[i][j]`: chance a mind in brain state `i` ends in `j`.
    pub transition: Vec<Vec<f64>>,
    pub universe: StateVector,
}

/// Evolve the universe by `u` and move minds according to `|b_j|²`.
///
/// For each brain state `i` the rest of the universe is taken to be the
/// relative state `(⟨B_i| ⊗ 1)|Ψ⟩`; a brain state with no weight in `Ψ`
/// keeps its minds (identity row).
pub fn many_minds_step(ensemble: &MindEnsemble, universe: &StateVector, u: &CMatrix) -> Result<MindStep> {
    let db = ensemble.brain_dim();
    if universe.dim() % db != 0 {
        return Err(Error::DimensionMismatch { expected: db, found: universe.dim() });
    }
    let dr = universe.dim() / db;
    check_dim(universe.dim(), u.nrows())?;
    check_dim(universe.dim(), u.ncols())?;
    let psi = universe.normalized();
    let amp = psi.amplitudes();
    let n = ensemble.brain_states.len();
    // brain basis as matrix columns, so ⟨B_j| components are rows of B†
    let basis = CMatrix::from_columns(&ensemble.brain_states.iter().map(|b| b.amplitudes().clone()).collect::<Vec<_>>());
    let components = |v: &CVector| -> Vec<CVector> {
        // (⟨B_j| ⊗ 1) v for every j
        (0..n)
            .map(|j| {
                CVector::from_fn(dr, |r, _| (0..db).map(|a| basis[(a, j)].conj() * v[a * dr + r]).sum())
            })
            .collect()
    };
    let relative = components(amp);
    let mut transition = vec![vec![0.0; n]; n];
    for i in 0..n {
        let w = relative[i].norm_squared();
        if w <= 1e-24 {
            transition[i][i] = 1.0;
            continue;
        }
        let rest = &relative[i] / c(w.sqrt(), 0.0);
        let start = linalg::kron(
            &CMatrix::from_column_slice(db, 1, ensemble.brain_states[i].normalized().amplitudes().as_slice()),
            &CMatrix::from_column_slice(dr, 1, rest.as_slice()),
        );
        let out = u * CVector::from_column_slice(start.as_slice());
        let parts = components(&out);
        let total: f64 = parts.iter().map(|p| p.norm_squared()).sum();
        for j in 0..n {
            transition[i][j] = parts[j].norm_squared() / total;
        }
    }
    let occupancy = (0..n).map(|j| (0..n).map(|i| ensemble.occupancy[i] * transition[i][j]).sum()).collect();
    Ok(MindStep {
        ensemble: MindEnsemble { brain_states: ensemble.brain_states.clone(), occupancy },
        transition,
        universe: psi.apply(u)?,
    })
}

/// Initial universe, brain basis and per-interval unitaries `t₀ → t₁ → …`.
#[derive(Clone, Debug)]
pub struct MindsScenario {
    pub name: String,
    pub ensemble: MindEnsemble,
    pub universe: StateVector,
    pub unitaries: Vec<CMatrix>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MindsConsistencyReport {
    pub scenario: String,
    pub steps: usize,
    /// Occupancy at the final time conditioned directly on `t₀`.
    pub direct_occupancy: Vec<f64>,
    /// Occupancy obtained by composing the step-by-step transitions.
    pub composed_occupancy: Vec<f64>,
    pub discrepancy: f64,
    /// Largest `|Σ_j T_ij − 1|` seen in any transition matrix.
    pub max_row_sum_error: f64,
    pub min_entry: f64,
}

fn row_stats(t: &[Vec<f64>], err: &mut f64, min: &mut f64) {
    for row in t {
        *err = err.max((row.iter().sum::<f64>() - 1.0).abs());
        *min = row.iter().cloned().fold(*min, f64::min);
    }
}

/// Compare direct `t₀ → t_n` transitions with the composition of single steps.
pub fn many_minds_consistency_probe(scenario: &MindsScenario) -> Result<MindsConsistencyReport> {
    let dim = scenario.universe.dim();
    let mut total_u = linalg::identity(dim);
    for u in &scenario.unitaries {
        total_u = u * total_u;
    }
    let mut max_row_sum_error: f64 = 0.0;
    let mut min_entry = f64::INFINITY;
    let direct = many_minds_step(&scenario.ensemble, &scenario.universe, &total_u)?;
    row_stats(&direct.transition, &mut max_row_sum_error, &mut min_entry);

    let mut ensemble = scenario.ensemble.clone();
    let mut universe = scenario.universe.clone();
    for u in &scenario.unitaries {
        let step = many_minds_step(&ensemble, &universe, u)?;
        row_stats(&step.transition, &mut max_row_sum_error, &mut min_entry);
        ensemble = step.ensemble;
        universe = step.universe;
    }
    let discrepancy = direct
        .ensemble
        .occupancy
        .iter()
        .zip(&ensemble.occupancy)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(MindsConsistencyReport {
        scenario: scenario.name.clone(),
        steps: scenario.unitaries.len(),
        direct_occupancy: direct.ensemble.occupancy,
        composed_occupancy: ensemble.occupancy,
        discrepancy,
        max_row_sum_error,
        min_entry: if min_entry.is_finite() { min_entry } else { 0.0 },
    })
}

fn hadamard() -> CMatrix {
    let s = 0.5f64.sqrt();
    CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

/// A brain qubit (with an idle qubit beside it) rotated into superposition
/// and back: composing the steps spreads the minds, the direct rule does not.
pub fn interference_minds_scenario() -> MindsScenario {
    let u = linalg::kron(&hadamard(), &linalg::identity(2));
    MindsScenario {
        name: "interference".into(),
        ensemble: MindEnsemble::standard(2),
        universe: StateVector::basis(4, 0).expect("4-dim"),
        unitaries: vec![u.clone(), u],
    }
}

/// Unitaries block-diagonal in the brain basis: a classical Markov case.
pub fn diagonal_minds_scenario() -> MindsScenario {
    let mut r = crate::random::rng(17);
    let block = |r: &mut rand_chacha::ChaCha8Rng| {
        let v0 = crate::random::random_unitary(r, 2);
        let v1 = crate::random::random_unitary(r, 2);
        let p0 = StateVector::basis(2, 0).expect("basis").outer();
        let p1 = StateVector::basis(2, 1).expect("basis").outer();
        linalg::kron(&p0, &v0) + linalg::kron(&p1, &v1)
    };
    let first = block(&mut r);
    let second = block(&mut r);
    let start = StateVector::from_real(&[0.6, 0.0, 0.0, 0.8]).expect("nonzero");
    MindsScenario {
        name: "diagonal".into(),
        ensemble: MindEnsemble::new(
            vec![StateVector::basis(2, 0).expect("basis"), StateVector::basis(2, 1).expect("basis")],
            vec![0.36, 0.64],
        )
        .expect("orthonormal"),
        universe: start,
        unitaries: vec![first, second],
    }
}

// ------------------------------------------------- consistent histories

/// Draw one history with probability `D([α],[α])`; medium-decoherent sets only.
pub fn sample_universe_history(set: &AlternativeSet, rho: &DensityMatrix, rng: &mut RandomSource) -> Result<History> {
    Ok(HistorySampler::new(set, rho)?.sample(rng))
}

/// Reusable sampler; computes the decoherence matrix once.
#[derive(Clone, Debug)]
pub struct HistorySampler {
    histories: Vec<History>,
    weights: Vec<f64>,
}

impl HistorySampler {
    pub fn new(set: &AlternativeSet, rho: &DensityMatrix) -> Result<Self> {
        let d = decoherence_matrix(set, rho)?;
        let rep = classify_consistency(&d, None);
        if rep.class != Consistency::Medium {
            return Err(Error::NotDecoherent(format!(
                "{:?}, max off-diagonal |D| = {:.12}",
                rep.class, rep.max_violation
            )));
        }
        let weights = d.diagonal().into_iter().map(|w| w.max(0.0)).collect();
        Ok(Self { histories: d.histories, weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn histories(&self) -> &[History] {
        &self.histories
    }

    pub fn sample(&self, rng: &mut RandomSource) -> History {
        self.histories[sample_index(&self.weights, rng.uniform())].clone()
    }

    /// Counts per history over `n` draws, in history order.
    pub fn counts(&self, n: usize, rng: &mut RandomSource) -> Vec<usize> {
        let mut counts = vec![0; self.histories.len()];
        for _ in 0..n {
            counts[sample_index(&self.weights, rng.uniform())] += 1;
        }
        counts
    }
}

/// Total-variation distance between empirical counts and weights.
pub fn total_variation(counts: &[usize], weights: &[f64]) -> f64 {
    let n: usize = counts.iter().sum();
    let wt: f64 = weights.iter().sum();
    0.5 * counts.iter().zip(weights).map(|(&k, &w)| (k as f64 / n as f64 - w / wt).abs()).sum::<f64>()
}

/// A projector asserted at a given time.
#[derive(Clone, Debug)]
pub struct TimedFact {
    pub time: f64,
    pub projector: Projector,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum FactStatus {
    DefiniteTrue,
    ProbabilisticTrue(f64),
    ReliableDefinite,
    ReliableProbabilistic(f64),
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct SetFactProbability {
    pub set_index: usize,
    /// `None` when the set does not house the candidate.
    pub probability: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactVerdict {
    pub status: FactStatus,
    /// One entry per consistent set housing the known facts.
    pub per_set: Vec<SetFactProbability>,
}

const FACT_TOL: f64 = 1e-9;

/// Indices of a slot whose projectors sum to `fact`, if the set has a slot
/// at that time and such a subset exists.
fn housing(set: &AlternativeSet, fact: &TimedFact) -> Option<(usize, Vec<usize>)> {
    let k = set.times().iter().position(|&t| (t - fact.time).abs() < 1e-12)?;
    let slot = &set.slots()[k];
    if slot.len() > 16 {
        return None;
    }
    let dim = set.dim();
    (0u32..1 << slot.len()).find_map(|mask| {
        let members: Vec<usize> = (0..slot.len()).filter(|i| mask >> i & 1 == 1).collect();
        let sum = members.iter().fold(CMatrix::zeros(dim, dim), |acc, &i| acc + slot[i].matrix());
        (linalg::max_abs_diff(&sum, fact.projector.matrix()) < FACT_TOL).then_some((k, members))
    })
}

fn probability_of(set: &AlternativeSet, probs: &[f64], facts: &[(usize, Vec<usize>)]) -> f64 {
    set.histories()
        .iter()
        .zip(probs)
        .filter(|(h, _)| facts.iter().all(|(k, allowed)| allowed.contains(&h.indices[*k])))
        .map(|(_, p)| p)
        .sum()
}

/// Condition on the known facts in every medium-decoherent set of `family`
/// that houses them, and grade the candidate across those sets.
///
/// True facts hold with the same probability in every such set; reliable
/// facts hold in at least one set housing the candidate.
pub fn classify_fact(
    candidate: &TimedFact,
    known: &[TimedFact],
    family: &[AlternativeSet],
    rho: &DensityMatrix,
) -> Result<FactVerdict> {
    let mut per_set = Vec::new();
    for (index, set) in family.iter().enumerate() {
        check_dim(set.dim(), rho.dim())?;
        let Some(known_slots) = known.iter().map(|f| housing(set, f)).collect::<Option<Vec<_>>>() else {
            continue;
        };
        let d = decoherence_matrix(set, rho)?;
        if classify_consistency(&d, None).class != Consistency::Medium {
            continue;
        }
        let probs = d.diagonal();
        let p_known = probability_of(set, &probs, &known_slots);
        if p_known <= crate::histories::NULL_PROBABILITY {
            continue;
        }
        let probability = housing(set, candidate).map(|cand| {
            let mut joint = known_slots.clone();
            joint.push(cand);
            (probability_of(set, &probs, &joint) / p_known).clamp(0.0, 1.0)
        });
        per_set.push(SetFactProbability { set_index: index, probability });
    }
    if per_set.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let housed: Vec<f64> = per_set.iter().filter_map(|s| s.probability).collect();
    let all_housed = housed.len() == per_set.len();
    let agree = |p: f64| housed.iter().all(|&q| (q - p).abs() < FACT_TOL);
    let status = match housed.first() {
        None => FactStatus::Undetermined,
        Some(&p0) if all_housed && agree(p0) => {
            if (p0 - 1.0).abs() < FACT_TOL {
                FactStatus::DefiniteTrue
            } else {
                FactStatus::ProbabilisticTrue(p0)
            }
        }
        Some(_) if housed.iter().any(|&q| (q - 1.0).abs() < FACT_TOL) => FactStatus::ReliableDefinite,
        Some(&p0) if agree(p0) => FactStatus::ReliableProbabilistic(p0),
        Some(_) => FactStatus::Undetermined,
    };
    Ok(FactVerdict { status, per_set })
}

/// The retrodiction family: `(|u⟩+|v⟩)/√2`, intermediate slot in the
/// `{u, v}` basis or the `{(u±v)/√2}` basis, final slot `{u, v}`.
pub fn retrodiction_family() -> (Vec<AlternativeSet>, DensityMatrix) {
    let u = spin::z_up();
    let v = spin::z_down();
    let plus = spin::x_up();
    let minus = spin::x_down();
    let ray = |s: &StateVector| Projector::onto_state(s);
    let final_slot = vec![ray(&u), ray(&v)];
    let uv = AlternativeSet::static_set(vec![1.0, 2.0], vec![vec![ray(&u), ray(&v)], final_slot.clone()]).expect("valid");
    let pm = AlternativeSet::static_set(vec![1.0, 2.0], vec![vec![ray(&plus), ray(&minus)], final_slot]).expect("valid");
    (vec![uv, pm], DensityMatrix::pure(&plus))
}

/// `(probability of Ω for the observable, post-collapse state)` helper used by
/// scenarios that place collapse at a designated subsystem.
pub fn collapse_at_boundary(
    psi: &StateVector,
    observable: &HermitianOperator,
    omega: &OutcomeSet,
) -> Result<(f64, StateVector)> {
    let p = pvm_from_hermitian(observable)?.projector_for(omega);
    Ok((projector_probability(psi, &p), collapse_onto(psi, &p)?))
}
