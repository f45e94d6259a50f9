//! Decoherent histories: chain operators, the decoherence functional,
//! consistency classes, coarse-graining, records and proposition logic.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::EvolutionSpec;
use crate::error::{Error, Result};
use crate::hilbert::{check_dim, spin, spin_half_operators, pvm_from_hermitian, DensityMatrix, HermitianOperator, Projector, StateVector};
use crate::linalg::{self, c, CMatrix, CVector};

pub const DEFAULT_HISTORY_CAP: usize = 4096;
/// Absolute probability below which a history is null.
pub const NULL_PROBABILITY: f64 = 1e-12;
const SLOT_TOL: f64 = 1e-10;

/// Exhaustive, exclusive projector families at increasing times.
#[derive(Clone, Debug)]
pub struct AlternativeSet {
    hamiltonian: HermitianOperator,
    hbar: f64,
    times: Vec<f64>,
    slots: Vec<Vec<Projector>>,
    heisenberg: Vec<Vec<CMatrix>>,
}

impl AlternativeSet {
    pub fn new(hamiltonian: HermitianOperator, hbar: f64, times: Vec<f64>, slots: Vec<Vec<Projector>>) -> Result<Self> {
        if times.len() != slots.len() {
            return Err(Error::InvalidArgument(format!("{} times for {} slots", times.len(), slots.len())));
        }
        if slots.is_empty() {
            return Err(Error::Empty);
        }
        if times.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        let dim = hamiltonian.dim();
        for (k, slot) in slots.iter().enumerate() {
            validate_slot(k, slot, dim)?;
        }
        let spec = EvolutionSpec::new(hamiltonian.clone(), hbar, 0.0)?;
        let heisenberg = times
            .iter()
            .zip(&slots)
            .map(|(&t, slot)| {
                let u = spec.at_time(t).propagator();
                let u_dag = u.adjoint();
                slot.iter().map(|p| &u_dag * p.matrix() * &u).collect()
            })
            .collect();
        Ok(Self { hamiltonian, hbar, times, slots, heisenberg })
    }

    /// Zero Hamiltonian, ħ = 1.
    pub fn static_set(times: Vec<f64>, slots: Vec<Vec<Projector>>) -> Result<Self> {
        let dim = slots.first().and_then(|s| s.first()).map(Projector::dim).ok_or(Error::Empty)?;
        Self::new(HermitianOperator::zero(dim), 1.0, times, slots)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slots(&self) -> &[Vec<Projector>] {
        &self.slots
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn slot_sizes(&self) -> Vec<usize> {
        self.slots.iter().map(Vec::len).collect()
    }

    pub fn history_count(&self) -> usize {
        self.slots.iter().map(Vec::len).product()
    }

    /// `P̂ᵏ_α(t_k)`.
    pub fn heisenberg_projector(&self, slot: usize, alpha: usize) -> &CMatrix {
        &self.heisenberg[slot][alpha]
    }

    /// Every history, first slot varying slowest.
    pub fn histories(&self) -> Vec<History> {
        let sizes = self.slot_sizes();
        let total = self.history_count();
        (0..total)
            .map(|mut code| {
                let mut idx = vec![0; sizes.len()];
                for k in (0..sizes.len()).rev() {
                    idx[k] = code % sizes[k];
                    code /= sizes[k];
                }
                History::new(idx)
            })
            .collect()
    }

    pub fn validate_history(&self, h: &History) -> Result<()> {
        if h.indices.len() != self.slots.len() {
            return Err(Error::DimensionMismatch { expected: self.slots.len(), found: h.indices.len() });
        }
        for (slot, (&index, s)) in h.indices.iter().zip(&self.slots).enumerate() {
            if index >= s.len() {
                return Err(Error::IndexOutOfRange { slot, index, len: s.len() });
            }
        }
        Ok(())
    }

    pub fn to_document(&self) -> AlternativeSetDoc {
        AlternativeSetDoc {
            hbar: self.hbar,
            hamiltonian: linalg::to_pair_rows(self.hamiltonian.matrix()),
            times: self.times.clone(),
            slots: self
                .slots
                .iter()
                .map(|s| s.iter().map(|p| linalg::to_pair_rows(p.matrix())).collect())
                .collect(),
        }
    }

    pub fn from_document(doc: &AlternativeSetDoc) -> Result<Self> {
        let parse = |rows: &[Vec<[f64; 2]>], what: &str| {
            linalg::from_pair_rows(rows).ok_or_else(|| Error::InvalidArgument(format!("malformed matrix in {what}")))
        };
        let h = HermitianOperator::new(parse(&doc.hamiltonian, "hamiltonian")?)?;
        let slots = doc
            .slots
            .iter()
            .enumerate()
            .map(|(k, s)| {
                s.iter()
                    .map(|m| Projector::new(parse(m, &format!("slot {k}"))?))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(h, doc.hbar, doc.times.clone(), slots)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("plain numeric document")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: AlternativeSetDoc =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("alternative set JSON: {e}")))?;
        Self::from_document(&doc)
    }
}

fn validate_slot(k: usize, slot: &[Projector], dim: usize) -> Result<()> {
    if slot.is_empty() {
        return Err(Error::InvalidPvm(format!("slot {k} is empty")));
    }
    let mut sum = CMatrix::zeros(dim, dim);
    for (a, p) in slot.iter().enumerate() {
        check_dim(dim, p.dim())?;
        for q in &slot[a + 1..] {
            let overlap = linalg::max_abs(&(p.matrix() * q.matrix()));
            if overlap > SLOT_TOL {
                return Err(Error::InvalidPvm(format!("slot {k} projectors overlap ({overlap:e})")));
            }
        }
        sum += p.matrix();
    }
    let gap = linalg::max_abs_diff(&sum, &linalg::identity(dim));
    if gap > SLOT_TOL {
        return Err(Error::InvalidPvm(format!("slot {k} does not sum to identity ({gap:e})")));
    }
    Ok(())
}

/// JSON form of an [`AlternativeSet`]; matrices are row-major `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AlternativeSetDoc {
    pub hbar: f64,
    pub hamiltonian: Vec<Vec<[f64; 2]>>,
    pub times: Vec<f64>,
    pub slots: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
}

/// One index per slot.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct History {
    pub indices: Vec<usize>,
}

impl History {
    pub fn new(indices: Vec<usize>) -> Self {
        Self { indices }
    }
}

/// `P̂ⁿ_{αₙ}(tₙ) ⋯ P̂¹_{α₁}(t₁)`, later times leftmost.
pub fn chain_operator(set: &AlternativeSet, h: &History) -> Result<CMatrix> {
    set.validate_history(h)?;
    let mut out = linalg::identity(set.dim());
    for (k, &alpha) in h.indices.iter().enumerate() {
        out = set.heisenberg_projector(k, alpha) * out;
    }
    Ok(out)
}

/// `Tr(C ρ C†)`, clamped to `[0, 1]`.
pub fn history_probability(set: &AlternativeSet, h: &History, rho: &DensityMatrix) -> Result<f64> {
    check_dim(set.dim(), rho.dim())?;
    let ch = chain_operator(set, h)?;
    Ok(linalg::trace(&(&ch * rho.matrix() * ch.adjoint())).re.clamp(0.0, 1.0))
}

/// `D([α],[α']) = Tr(C_α ρ C_α'†)` over every pair of histories.
#[derive(Clone, Debug)]
pub struct DecoherenceMatrix {
    pub entries: CMatrix,
    pub histories: Vec<History>,
    pub initial_state: DensityMatrix,
}

impl DecoherenceMatrix {
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.histories.len()).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.entries)
    }

    pub fn diagonal_sum(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn index_of(&self, h: &History) -> Option<usize> {
        self.histories.iter().position(|x| x == h)
    }

    /// `1e-9 · (1 + max diagonal)`.
    pub fn default_tolerance(&self) -> f64 {
        1e-9 * (1.0 + self.diagonal().into_iter().fold(0.0, f64::max))
    }
}

pub fn decoherence_matrix(set: &AlternativeSet, rho: &DensityMatrix) -> Result<DecoherenceMatrix> {
    decoherence_matrix_capped(set, rho, DEFAULT_HISTORY_CAP)
}

pub fn decoherence_matrix_capped(set: &AlternativeSet, rho: &DensityMatrix, cap: usize) -> Result<DecoherenceMatrix> {
    check_dim(set.dim(), rho.dim())?;
    let count = set.history_count();
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    let histories = set.histories();
    let chains: Vec<CMatrix> = histories.iter().map(|h| chain_operator(set, h)).collect::<Result<_>>()?;
    let left: Vec<CMatrix> = chains.iter().map(|ch| ch * rho.matrix()).collect();
    let mut entries = CMatrix::zeros(count, count);
    for i in 0..count {
        for j in i..count {
            // Tr(A B†) = Σ A_kl conj(B_kl)
            let d: linalg::C64 = left[i].iter().zip(chains[j].iter()).map(|(a, b)| a * b.conj()).sum();
            entries[(i, j)] = d;
            entries[(j, i)] = d.conj();
        }
        entries[(i, i)].im = 0.0;
    }
    Ok(DecoherenceMatrix { entries, histories, initial_state: rho.clone() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Consistency {
    Medium,
    WeakOnly,
    Inconsistent,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub class: Consistency,
    /// Largest off-diagonal `|D|`.
    pub max_violation: f64,
    /// Largest off-diagonal `|Re D|`.
    pub max_real_violation: f64,
    pub tolerance: f64,
}

/// Classify with `tol`, or the default scale-aware tolerance when `None`.
pub fn classify_consistency(d: &DecoherenceMatrix, tol: Option<f64>) -> ConsistencyReport {
    let tolerance = tol.unwrap_or_else(|| d.default_tolerance());
    let n = d.histories.len();
    let mut max_violation: f64 = 0.0;
    let mut max_real_violation: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                max_violation = max_violation.max(d.entries[(i, j)].norm());
                max_real_violation = max_real_violation.max(d.entries[(i, j)].re.abs());
            }
        }
    }
    let class = if max_violation < tolerance {
        Consistency::Medium
    } else if max_real_violation < tolerance {
        Consistency::WeakOnly
    } else {
        Consistency::Inconsistent
    };
    ConsistencyReport { class, max_violation, max_real_violation, tolerance }
}

/// A coarse-grained set together with the map back to its parent.
#[derive(Clone, Debug)]
pub struct CoarseGraining {
    pub set: AlternativeSet,
    /// Parent slot index of each surviving coarse slot.
    pub kept_slots: Vec<usize>,
    /// `partitions[k][β]` lists the fine indices merged into coarse index `β` of parent slot `k`.
    pub partitions: Vec<Vec<Vec<usize>>>,
    fine_sizes: Vec<usize>,
}

/// Merge alternatives by summing projectors; slots that collapse to the
/// single identity are dropped together with their time.
pub fn coarse_grain(set: &AlternativeSet, partitions: &[Vec<Vec<usize>>]) -> Result<CoarseGraining> {
    if partitions.len() != set.slots.len() {
        return Err(Error::InvalidPartition(format!(
            "{} partitions for {} slots",
            partitions.len(),
            set.slots.len()
        )));
    }
    let mut times = Vec::new();
    let mut slots = Vec::new();
    let mut kept_slots = Vec::new();
    for (k, (part, fine)) in partitions.iter().zip(&set.slots).enumerate() {
        let mut seen = vec![false; fine.len()];
        for block in part {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("slot {k} has an empty block")));
            }
            for &i in block {
                if i >= fine.len() || seen[i] {
                    return Err(Error::InvalidPartition(format!("slot {k}: index {i} out of range or repeated")));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidPartition(format!("slot {k}: partition does not cover every index")));
        }
        if part.len() == 1 {
            continue;
        }
        let merged = part
            .iter()
            .map(|block| {
                let m = block.iter().fold(CMatrix::zeros(set.dim(), set.dim()), |acc, &i| acc + fine[i].matrix());
                Projector::new(m)
            })
            .collect::<Result<Vec<_>>>()?;
        times.push(set.times[k]);
        slots.push(merged);
        kept_slots.push(k);
    }
    let coarse = if slots.is_empty() {
        AlternativeSet::new(set.hamiltonian.clone(), set.hbar, vec![set.times[0]], vec![vec![Projector::identity(set.dim())]])?
    } else {
        AlternativeSet::new(set.hamiltonian.clone(), set.hbar, times, slots)?
    };
    Ok(CoarseGraining { set: coarse, kept_slots, partitions: partitions.to_vec(), fine_sizes: set.slot_sizes() })
}

impl CoarseGraining {
    /// The product set `S₁ × ⋯ × Sₙ` of fine histories making up a coarse one.
    pub fn fine_grain_map(&self, coarse: &History) -> Result<Vec<History>> {
        self.set.validate_history(coarse)?;
        let mut choices: Vec<Vec<usize>> = self.fine_sizes.iter().map(|&n| (0..n).collect()).collect();
        for (pos, &k) in self.kept_slots.iter().enumerate() {
            choices[k] = self.partitions[k][coarse.indices[pos]].clone();
        }
        let mut out = vec![Vec::new()];
        for options in &choices {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<usize>| {
                    options.iter().map(move |&i| {
                        let mut p = prefix.clone();
                        p.push(i);
                        p
                    })
                })
                .collect();
        }
        Ok(out.into_iter().map(History::new).collect())
    }
}

/// `max |p_coarse − Σ p_fine|` over every coarse history.
pub fn sum_rule_violation(fine: &AlternativeSet, coarse: &CoarseGraining, rho: &DensityMatrix) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for h in coarse.set.histories() {
        let p = history_probability(&coarse.set, &h, rho)?;
        let mut total = 0.0;
        for f in coarse.fine_grain_map(&h)? {
            total += history_probability(fine, &f, rho)?;
        }
        worst = worst.max((p - total).abs());
    }
    Ok(worst)
}

/// Every partition of `0..n` into blocks (Bell-number many; keep `n` small).
pub fn all_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![vec![]];
    for i in 0..n {
        let mut next = Vec::new();
        for p in &out {
            for b in 0..p.len() {
                let mut q = p.clone();
                q[b].push(i);
                next.push(q);
            }
            let mut q = p.clone();
            q.push(vec![i]);
            next.push(q);
        }
        out = next;
    }
    out
}

#[derive(Clone, Debug)]
pub struct RecordsReport {
    pub orthogonal: bool,
    /// `C_[α]|ψ⟩` in history order (may be zero vectors).
    pub branch_vectors: Vec<CVector>,
    pub histories: Vec<History>,
    /// Largest `|⟨b_α|b_α'⟩|` over distinct pairs.
    pub max_overlap: f64,
    pub tolerance: f64,
}

/// Pairwise orthogonality of the branch vectors of a pure state.
pub fn records_check(set: &AlternativeSet, psi: &StateVector) -> Result<RecordsReport> {
    check_dim(set.dim(), psi.dim())?;
    let psi = psi.normalized();
    let histories = set.histories();
    let branch_vectors: Vec<CVector> = histories
        .iter()
        .map(|h| chain_operator(set, h).map(|ch| ch * psi.amplitudes()))
        .collect::<Result<_>>()?;
    let max_norm = branch_vectors.iter().map(|b| b.norm_squared()).fold(0.0, f64::max);
    let tolerance = 1e-9 * (1.0 + max_norm);
    let mut max_overlap: f64 = 0.0;
    for i in 0..branch_vectors.len() {
        for j in i + 1..branch_vectors.len() {
            max_overlap = max_overlap.max(linalg::inner(&branch_vectors[i], &branch_vectors[j]).norm());
        }
    }
    Ok(RecordsReport { orthogonal: max_overlap < tolerance, branch_vectors, histories, max_overlap, tolerance })
}

/// Indices fixed on a subset of slots, as `(slot, index)` pairs.
pub type SubHistory = Vec<(usize, usize)>;

#[derive(Clone, Debug, Serialize)]
pub struct ConditionalReport {
    /// `p(target ∧ given) / p(given)` with both evaluated as coarse histories.
    pub naive: f64,
    /// The same ratio with each side summed over its fine completions.
    pub renormalized: f64,
    pub discrepancy: f64,
}

fn coarse_probability(set: &AlternativeSet, fixed: &[(usize, usize)], rho: &DensityMatrix) -> Result<f64> {
    let mut sorted = fixed.to_vec();
    sorted.sort();
    let mut ch = linalg::identity(set.dim());
    for &(k, a) in &sorted {
        ch = set.heisenberg_projector(k, a) * ch;
    }
    Ok(linalg::trace(&(&ch * rho.matrix() * ch.adjoint())).re.clamp(0.0, 1.0))
}

fn fine_probability(set: &AlternativeSet, fixed: &[(usize, usize)], rho: &DensityMatrix) -> Result<f64> {
    let mut total = 0.0;
    for h in set.histories() {
        if fixed.iter().all(|&(k, a)| h.indices[k] == a) {
            total += history_probability(set, &h, rho)?;
        }
    }
    Ok(total)
}

fn validate_sub(set: &AlternativeSet, sub: &[(usize, usize)]) -> Result<()> {
    for &(slot, index) in sub {
        let len = *set.slot_sizes().get(slot).ok_or(Error::IndexOutOfRange { slot, index, len: 0 })?;
        if index >= len {
            return Err(Error::IndexOutOfRange { slot, index, len });
        }
    }
    Ok(())
}

/// Probability of `target` given `given`, computed both ways.
pub fn conditional_probability(
    set: &AlternativeSet,
    rho: &DensityMatrix,
    target: &[(usize, usize)],
    given: &[(usize, usize)],
) -> Result<ConditionalReport> {
    check_dim(set.dim(), rho.dim())?;
    validate_sub(set, target)?;
    validate_sub(set, given)?;
    let given_slots: BTreeSet<usize> = given.iter().map(|x| x.0).collect();
    let target_slots: BTreeSet<usize> = target.iter().map(|x| x.0).collect();
    if given_slots.len() != given.len() || target_slots.len() != target.len() || !given_slots.is_disjoint(&target_slots) {
        return Err(Error::InvalidArgument("target and given must fix disjoint slots once each".into()));
    }
    let joint: Vec<(usize, usize)> = target.iter().chain(given).copied().collect();
    let den_naive = coarse_probability(set, given, rho)?;
    let den_fine = fine_probability(set, given, rho)?;
    if den_naive <= NULL_PROBABILITY || den_fine <= NULL_PROBABILITY {
        return Err(Error::ConditioningOnNull(den_naive.min(den_fine)));
    }
    let naive = coarse_probability(set, &joint, rho)? / den_naive;
    let renormalized = fine_probability(set, &joint, rho)? / den_fine;
    Ok(ConditionalReport { naive, renormalized, discrepancy: (naive - renormalized).abs() })
}

/// A set of histories of one alternative set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proposition {
    pub members: BTreeSet<History>,
}

impl Proposition {
    pub fn new<I: IntoIterator<Item = History>>(members: I) -> Self {
        Self { members: members.into_iter().collect() }
    }

    pub fn empty() -> Self {
        Self { members: BTreeSet::new() }
    }

    pub fn meet(&self, other: &Self) -> Self {
        Self { members: self.members.intersection(&other.members).cloned().collect() }
    }

    pub fn join(&self, other: &Self) -> Self {
        Self { members: self.members.union(&other.members).cloned().collect() }
    }
}

/// Classical logic on propositions modulo null histories.
#[derive(Clone, Debug)]
pub struct PropositionLogic {
    histories: Vec<History>,
    probabilities: Vec<f64>,
}

impl PropositionLogic {
    pub fn new(set: &AlternativeSet, rho: &DensityMatrix) -> Result<Self> {
        let histories = set.histories();
        let probabilities = histories.iter().map(|h| history_probability(set, h, rho)).collect::<Result<_>>()?;
        Ok(Self { histories, probabilities })
    }

    pub fn universe(&self) -> Proposition {
        Proposition::new(self.histories.iter().cloned())
    }

    pub fn not(&self, a: &Proposition) -> Proposition {
        Proposition::new(self.histories.iter().filter(|h| !a.members.contains(h)).cloned())
    }

    fn is_null(&self, h: &History) -> bool {
        self.histories
            .iter()
            .position(|x| x == h)
            .map(|i| self.probabilities[i] < NULL_PROBABILITY)
            .unwrap_or(true)
    }

    pub fn probability(&self, a: &Proposition) -> f64 {
        self.histories
            .iter()
            .zip(&self.probabilities)
            .filter(|(h, _)| a.members.contains(h))
            .map(|(_, p)| p)
            .sum()
    }

    /// Every history in `a Δ b` is null.
    pub fn equiv(&self, a: &Proposition, b: &Proposition) -> bool {
        a.members.symmetric_difference(&b.members).all(|h| self.is_null(h))
    }

    /// Every history in `a − b` is null.
    pub fn implies(&self, a: &Proposition, b: &Proposition) -> bool {
        a.members.difference(&b.members).all(|h| self.is_null(h))
    }
}

/// `ρ = |x↑⟩⟨x↑|` with `σ̂_z` at t = 1 then `σ̂_x` at t = 2, no dynamics.
///
/// Histories differing only in the first slot interfere with `D = 1/4`.
pub fn interference_demo() -> (AlternativeSet, DensityMatrix) {
    let set = AlternativeSet::static_set(
        vec![1.0, 2.0],
        vec![spin_slot('z'), spin_slot('x')],
    )
    .expect("valid spin slots");
    (set, DensityMatrix::pure(&spin::x_up()))
}

/// `ρ = |x↑⟩⟨x↑|` with `σ̂_x` at t = 1 then `σ̂_z` at t = 2: medium decoherent.
pub fn decoherent_demo() -> (AlternativeSet, DensityMatrix) {
    let set = AlternativeSet::static_set(
        vec![1.0, 2.0],
        vec![spin_slot('x'), spin_slot('z')],
    )
    .expect("valid spin slots");
    (set, DensityMatrix::pure(&spin::x_up()))
}

/// Random set built from one orthonormal basis, so its Heisenberg projectors
/// commute and the set is medium decoherent for every initial state.
pub fn random_commuting_set<R: Rng + ?Sized>(rng: &mut R, dim: usize, slots: usize) -> AlternativeSet {
    let basis = crate::random::random_basis(rng, dim);
    let energies: Vec<f64> = (0..dim).map(|_| crate::random::normal(rng)).collect();
    let u = CMatrix::from_columns(&basis);
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(dim, energies.iter().map(|&e| c(e, 0.0))));
    let h = HermitianOperator::new(linalg::symmetrize(&(&u * diag * u.adjoint()))).expect("Hermitian by construction");
    let mut times = Vec::with_capacity(slots);
    let mut t = 0.0;
    let mut slot_list = Vec::with_capacity(slots);
    for _ in 0..slots {
        t += 0.1 + rng.random::<f64>();
        times.push(t);
        let blocks = 2 + rng.random_range(0..dim.max(2) - 1);
        let blocks = blocks.min(dim);
        let labels: Vec<usize> = (0..dim).map(|i| if i < blocks { i } else { rng.random_range(0..blocks) }).collect();
        let slot = (0..blocks)
            .map(|b| {
                let cols: Vec<CVector> = (0..dim).filter(|&i| labels[i] == b).map(|i| basis[i].clone()).collect();
                Projector::onto_span(&CMatrix::from_columns(&cols)).expect("orthonormal columns")
            })
            .collect();
        slot_list.push(slot);
    }
    AlternativeSet::new(h, 1.0, times, slot_list).expect("valid commuting set")
}

/// Random set whose slots are spectral families of random observables.
pub fn random_generic_set<R: Rng + ?Sized>(rng: &mut R, dim: usize, slots: usize) -> AlternativeSet {
    let h = crate::random::random_hermitian(rng, dim);
    let mut times = Vec::with_capacity(slots);
    let mut t = 0.0;
    let mut slot_list = Vec::with_capacity(slots);
    for _ in 0..slots {
        t += 0.1 + rng.random::<f64>();
        times.push(t);
        let a = crate::random::random_hermitian(rng, dim);
        let pvm = pvm_from_hermitian(&a).expect("Hermitian");
        // merge neighbouring eigenvalues into at most three outcomes
        let groups = 2 + rng.random_range(0..2usize);
        let groups = groups.min(pvm.len());
        let mut merged = vec![CMatrix::zeros(dim, dim); groups];
        for (i, e) in pvm.entries().iter().enumerate() {
            merged[i * groups / pvm.len()] += e.projector.matrix();
        }
        slot_list.push(merged.into_iter().map(|m| Projector::new(m).expect("sum of PVM entries")).collect());
    }
    AlternativeSet::new(h, 1.0, times, slot_list).expect("valid generic set")
}

/// Spectral projectors of a Pauli operator; index 0 is the −1 outcome.
pub fn spin_slot(axis: char) -> Vec<Projector> {
    let (sx, sy, sz) = spin_half_operators();
    let op = match axis {
        'x' => sx,
        'y' => sy,
        _ => sz,
    };
    pvm_from_hermitian(&op).expect("Pauli").entries().iter().map(|e| e.projector.clone()).collect()
}
