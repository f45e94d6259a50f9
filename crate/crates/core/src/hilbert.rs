//! Finite-dimensional Hilbert-space value types.
//!
//! Kets are stored unnormalised: every probability formula in this crate
//! divides by `⟨ψ|ψ⟩`. Operators are dense complex matrices validated on
//! construction and immutable afterwards.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, hermiticity_error, identity, kron, max_abs, max_abs_diff, symmetrize, CMatrix,
    CVector, C64, ONE, ZERO,
};

/// Entrywise tolerance for Hermiticity.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Entrywise tolerance for `P² = P`.
pub const PROJECTOR_TOL: f64 = 1e-12;
/// Orthogonality and completeness tolerance for PVMs.
pub const PVM_TOL: f64 = 1e-10;
/// Density matrices: trace and positivity tolerance.
pub const DENSITY_TOL: f64 = 1e-10;
/// Singular-value ratio below which a reshaped ket counts as rank one.
pub const PRODUCT_RATIO_TOL: f64 = 1e-9;
/// Slack on closed interval endpoints when matching computed eigenvalues.
pub const SPECTRUM_MATCH_TOL: f64 = 1e-9;

/// A ket `|ψ⟩` over a finite labelled basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    labels: Vec<String>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let labels = (0..amplitudes.len()).map(|i| i.to_string()).collect();
        Self::with_labels(amplitudes, labels)
    }

    pub fn with_labels(amplitudes: Vec<C64>, labels: Vec<String>) -> Result<Self> {
        Self::from_vector_labelled(CVector::from_vec(amplitudes), labels)
    }

    pub fn from_vector(amplitudes: CVector) -> Result<Self> {
        let labels = (0..amplitudes.len()).map(|i| i.to_string()).collect();
        Self::from_vector_labelled(amplitudes, labels)
    }

    fn from_vector_labelled(amplitudes: CVector, labels: Vec<String>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Empty);
        }
        if labels.len() != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: amplitudes.len(),
                found: labels.len(),
            });
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        if amplitudes.norm_squared() == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self { amplitudes, labels })
    }

    /// Computational basis ket `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[index] = ONE;
        Self::from_vector(v)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| c(a, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(linalg::inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn normalized(&self) -> StateVector {
        let n = self.norm_sqr().sqrt();
        StateVector {
            amplitudes: &self.amplitudes / c(n, 0.0),
            labels: self.labels.clone(),
        }
    }

    pub fn scaled(&self, factor: C64) -> Result<StateVector> {
        Self::from_vector_labelled(&self.amplitudes * factor, self.labels.clone())
    }

    /// Linear combination `self + other`.
    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), other.dim())?;
        Self::from_vector_labelled(&self.amplitudes + &other.amplitudes, self.labels.clone())
    }

    /// Apply an arbitrary square matrix.
    pub fn apply(&self, op: &CMatrix) -> Result<StateVector> {
        check_square(op)?;
        check_dim(op.nrows(), self.dim())?;
        Self::from_vector_labelled(op * &self.amplitudes, self.labels.clone())
    }

    /// `|ψ⟩⟨ψ|` without normalisation.
    pub fn outer(&self) -> CMatrix {
        linalg::outer(&self.amplitudes, &self.amplitudes)
    }

    /// `⟨ψ|A|ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        check_dim(op.nrows(), self.dim())?;
        Ok(linalg::inner(&self.amplitudes, &(op * &self.amplitudes)) / self.norm_sqr())
    }
}

/// A self-adjoint operator.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        if matrix.nrows() == 0 {
            return Err(Error::Empty);
        }
        let err = hermiticity_error(&matrix);
        if err > HERMITIAN_TOL {
            return Err(Error::NotHermitian(err));
        }
        Ok(Self { matrix: symmetrize(&matrix) })
    }

    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        let data: Vec<C64> = rows.iter().map(|&x| c(x, 0.0)).collect();
        Self::new(CMatrix::from_row_slice(dim, dim, &data))
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: identity(dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: CMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self { matrix: &self.matrix + &other.matrix })
    }

    pub fn scale(&self, factor: f64) -> HermitianOperator {
        Self { matrix: &self.matrix * c(factor, 0.0) }
    }

    /// Ascending eigenvalues.
    pub fn spectrum(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.matrix).0
    }

    pub fn spectral_radius(&self) -> f64 {
        self.spectrum().iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// An orthogonal projector `P = P² = P†`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let herm = hermiticity_error(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let m = symmetrize(&matrix);
        let idem = max_abs_diff(&(&m * &m), &m);
        if idem > PROJECTOR_TOL {
            return Err(Error::NotProjector(idem));
        }
        let tr = linalg::trace(&m).re;
        let rank = tr.round();
        if (tr - rank).abs() > 1e-9 {
            return Err(Error::NotProjector((tr - rank).abs()));
        }
        Ok(Self { matrix: m, rank: rank as usize })
    }

    /// Projector onto the span of arbitrary (not necessarily orthonormal) columns.
    pub fn onto_span(columns: &CMatrix) -> Result<Self> {
        let basis = linalg::range_basis(columns, 1e-9);
        Self::new(linalg::projector_from_basis(&basis))
    }

    /// Rank-one projector `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn onto_state(psi: &StateVector) -> Self {
        let m = psi.outer() / c(psi.norm_sqr(), 0.0);
        Self { matrix: symmetrize(&m), rank: 1 }
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: CMatrix::zeros(dim, dim), rank: 0 }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: identity(dim), rank: dim }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `1 − P`.
    pub fn complement(&self) -> Projector {
        Projector {
            matrix: identity(self.dim()) - &self.matrix,
            rank: self.dim() - self.rank,
        }
    }

    /// Largest entrywise distance between the two projectors.
    pub fn distance(&self, other: &Projector) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }

    pub fn as_operator(&self) -> HermitianOperator {
        HermitianOperator { matrix: self.matrix.clone() }
    }
}

/// One spectral entry of a PVM.
#[derive(Clone, Debug, PartialEq)]
pub struct PvmEntry {
    pub eigenvalue: f64,
    pub projector: Projector,
}

/// Projection-valued measure `{(λ_i, P_i)}` with ascending eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionValuedMeasure {
    entries: Vec<PvmEntry>,
}

impl ProjectionValuedMeasure {
    pub fn from_entries(entries: Vec<(f64, Projector)>) -> Result<Self> {
        let first = entries.first().ok_or(Error::Empty)?;
        let dim = first.1.dim();
        for w in entries.windows(2) {
            if w[0].0.partial_cmp(&w[1].0) != Some(std::cmp::Ordering::Less) {
                return Err(Error::InvalidPvm("eigenvalues must be strictly increasing".into()));
            }
        }
        let mut total = CMatrix::zeros(dim, dim);
        for (i, (_, p)) in entries.iter().enumerate() {
            check_dim(dim, p.dim())?;
            total += p.matrix();
            for (_, q) in entries.iter().skip(i + 1) {
                let overlap = max_abs(&(p.matrix() * q.matrix()));
                if overlap > PVM_TOL {
                    return Err(Error::InvalidPvm(format!(
                        "projectors not orthogonal (overlap {overlap:e})"
                    )));
                }
            }
        }
        let completeness = max_abs_diff(&total, &identity(dim));
        if completeness > PVM_TOL {
            return Err(Error::InvalidPvm(format!(
                "projectors do not sum to identity (error {completeness:e})"
            )));
        }
        Ok(Self {
            entries: entries
                .into_iter()
                .map(|(eigenvalue, projector)| PvmEntry { eigenvalue, projector })
                .collect(),
        })
    }

    pub fn entries(&self) -> &[PvmEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].projector.dim()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.eigenvalue).collect()
    }

    /// `P̂_Ω`: sum of the projectors whose eigenvalue lies in `omega`.
    pub fn projector_for(&self, omega: &OutcomeSet) -> Projector {
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        let mut rank = 0;
        for e in self.entries.iter().filter(|e| omega.contains(e.eigenvalue)) {
            m += e.projector.matrix();
            rank += e.projector.rank();
        }
        Projector { matrix: m, rank }
    }

    /// `Σ λ_i P_i`.
    pub fn reconstruct(&self) -> CMatrix {
        let dim = self.dim();
        self.entries.iter().fold(CMatrix::zeros(dim, dim), |acc, e| {
            acc + e.projector.matrix() * c(e.eigenvalue, 0.0)
        })
    }
}

/// A mixed state `ρ̂`: Hermitian, positive semi-definite, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        if matrix.nrows() == 0 {
            return Err(Error::Empty);
        }
        let herm = hermiticity_error(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian ({herm:e})")));
        }
        let m = symmetrize(&matrix);
        let tr = linalg::trace(&m).re;
        if (tr - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let (values, _) = linalg::hermitian_eigen(&m);
        if values[0] < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {:e}", values[0])));
        }
        Ok(Self { matrix: m })
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn pure(psi: &StateVector) -> Self {
        Self { matrix: Projector::onto_state(psi).matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: identity(dim) / c(dim as f64, 0.0) }
    }

    /// `Σ w_i |ψ_i⟩⟨ψ_i|/⟨ψ_i|ψ_i⟩` for non-negative weights summing to one.
    pub fn from_ensemble(members: &[(f64, StateVector)]) -> Result<Self> {
        let (_, first) = members.first().ok_or(Error::Empty)?;
        let dim = first.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (w, psi) in members {
            if *w < 0.0 {
                return Err(Error::InvalidDensity(format!("negative weight {w}")));
            }
            check_dim(dim, psi.dim())?;
            m += Projector::onto_state(psi).matrix() * c(*w, 0.0);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.matrix).0
    }

    /// `Tr(ρ̂ Â)`.
    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        check_dim(self.dim(), op.nrows())?;
        Ok(linalg::trace(&(&self.matrix * op)))
    }
}

/// One real interval with optionally open ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "closed")]
    pub lo_closed: bool,
    #[serde(default = "closed")]
    pub hi_closed: bool,
}

fn closed() -> bool {
    true
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed {
            x >= self.lo - SPECTRUM_MATCH_TOL
        } else {
            x > self.lo + SPECTRUM_MATCH_TOL
        };
        let below = if self.hi_closed {
            x <= self.hi + SPECTRUM_MATCH_TOL
        } else {
            x < self.hi - SPECTRUM_MATCH_TOL
        };
        above && below
    }
}

/// A finite union of real intervals, used as the outcome set `Ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct OutcomeSet {
    intervals: Vec<Interval>,
}

impl OutcomeSet {
    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    /// The single point `{value}`.
    pub fn point(value: f64) -> Self {
        Self::closed(value, value)
    }

    pub fn points(values: &[f64]) -> Self {
        Self { intervals: values.iter().map(|&v| Self::closed(v, v).intervals[0]).collect() }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { intervals: vec![Interval { lo, hi, lo_closed: true, hi_closed: true }] }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self { intervals: vec![Interval { lo, hi, lo_closed: false, hi_closed: false }] }
    }

    pub fn all() -> Self {
        Self::closed(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn union(mut self, other: OutcomeSet) -> Self {
        self.intervals.extend(other.intervals);
        self
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }
}

impl fmt::Display for OutcomeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|i| {
                if i.lo == i.hi {
                    format!("{{{}}}", i.lo)
                } else {
                    format!(
                        "{}{}, {}{}",
                        if i.lo_closed { '[' } else { '(' },
                        i.lo,
                        i.hi,
                        if i.hi_closed { ']' } else { ')' }
                    )
                }
            })
            .collect();
        write!(f, "{}", if parts.is_empty() { "∅".to_string() } else { parts.join(" ∪ ") })
    }
}

/// Kronecker product with the left operand as the slow index.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        let amplitudes = kron(
            &CMatrix::from_column_slice(self.dim(), 1, self.amplitudes.as_slice()),
            &CMatrix::from_column_slice(other.dim(), 1, other.amplitudes.as_slice()),
        );
        let labels = self
            .labels
            .iter()
            .flat_map(|a| other.labels.iter().map(move |b| format!("{a}⊗{b}")))
            .collect();
        StateVector {
            amplitudes: CVector::from_column_slice(amplitudes.as_slice()),
            labels,
        }
    }
}

impl Tensor for HermitianOperator {
    fn tensor(&self, other: &Self) -> Self {
        HermitianOperator { matrix: kron(&self.matrix, &other.matrix) }
    }
}

impl Tensor for Projector {
    fn tensor(&self, other: &Self) -> Self {
        Projector { matrix: kron(&self.matrix, &other.matrix), rank: self.rank * other.rank }
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        DensityMatrix { matrix: kron(&self.matrix, &other.matrix) }
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// Outcome of the separability test.
#[derive(Clone, Debug)]
pub struct ProductTest {
    pub is_product: bool,
    /// `σ₂/σ₁` of the reshaped amplitude matrix (0 for a 1-dim factor).
    pub singular_ratio: f64,
    pub factors: Option<(StateVector, StateVector)>,
}

/// Decide whether `psi` factorises as `|a⟩⊗|b⟩` for the given split.
pub fn is_product_state(psi: &StateVector, split: (usize, usize)) -> Result<ProductTest> {
    let (da, db) = split;
    if da == 0 || db == 0 || da * db != psi.dim() {
        return Err(Error::DimensionMismatch { expected: psi.dim(), found: da * db });
    }
    let amps = psi.amplitudes();
    let m = CMatrix::from_fn(da, db, |i, j| amps[i * db + j]);
    let svd = m.svd(true, true);
    let s = &svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let s1 = s[order[0]];
    let s2 = order.get(1).map(|&k| s[k]).unwrap_or(0.0);
    let ratio = s2 / s1;
    let is_product = ratio < PRODUCT_RATIO_TOL;
    let factors = if is_product {
        let u = svd.u.expect("u requested");
        let v_t = svd.v_t.expect("v_t requested");
        let k = order[0];
        let a: Vec<C64> = (0..da).map(|i| u[(i, k)] * s1).collect();
        let b: Vec<C64> = (0..db).map(|j| v_t[(k, j)]).collect();
        Some((StateVector::new(a)?, StateVector::new(b)?))
    } else {
        None
    };
    Ok(ProductTest { is_product, singular_ratio: ratio, factors })
}

/// Spectral decomposition of a Hermitian operator into its PVM.
///
/// Eigenvalues closer than `1e-8·(spectral radius + 1)` share one eigenspace.
pub fn pvm_from_hermitian(a: &HermitianOperator) -> Result<ProjectionValuedMeasure> {
    let err = hermiticity_error(a.matrix());
    if err > HERMITIAN_TOL {
        return Err(Error::NotHermitian(err));
    }
    let (values, vectors) = linalg::hermitian_eigen(a.matrix());
    let radius = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let gap_tol = 1e-8 * (radius + 1.0);
    let dim = a.dim();

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if v - values[*g.last().unwrap()] < gap_tol => g.push(k),
            _ => groups.push(vec![k]),
        }
    }

    let entries = groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().map(|&k| values[k]).sum::<f64>() / g.len() as f64;
            let mut basis = CMatrix::zeros(dim, g.len());
            for (dst, &k) in g.iter().enumerate() {
                basis.set_column(dst, &vectors.column(k));
            }
            let projector = Projector {
                matrix: linalg::projector_from_basis(&basis),
                rank: g.len(),
            };
            PvmEntry { eigenvalue: mean, projector }
        })
        .collect();
    Ok(ProjectionValuedMeasure { entries })
}

/// `Ĥ₁⊗1 + 1⊗Ĥ₂`.
pub fn joint_hamiltonian(h1: &HermitianOperator, h2: &HermitianOperator) -> HermitianOperator {
    let left = h1.tensor(&HermitianOperator::identity(h2.dim()));
    let right = HermitianOperator::identity(h1.dim()).tensor(h2);
    HermitianOperator { matrix: left.matrix + right.matrix }
}

/// Pauli operators `(σ̂_x, σ̂_y, σ̂_z)` with eigenvalues ±1.
///
/// At this normalisation `[σ̂_x, σ̂_y] = 2iσ̂_z`; halve them for the spin
/// operators obeying `[Ŝ_x, Ŝ_y] = iŜ_z`.
pub fn spin_half_operators() -> (HermitianOperator, HermitianOperator, HermitianOperator) {
    let sx = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let sy = CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]);
    let sz = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(-1.0, 0.0)]);
    (
        HermitianOperator { matrix: sx },
        HermitianOperator { matrix: sy },
        HermitianOperator { matrix: sz },
    )
}

/// Spin-½ eigenkets in the `σ̂_z` basis `(|↑⟩, |↓⟩)`.
pub mod spin {
    use super::StateVector;
    use crate::linalg::c;
    use std::f64::consts::FRAC_1_SQRT_2 as H;

    fn ket(a: (f64, f64), b: (f64, f64), label_up: &str, label_down: &str) -> StateVector {
        StateVector::with_labels(
            vec![c(a.0, a.1), c(b.0, b.1)],
            vec![label_up.to_string(), label_down.to_string()],
        )
        .expect("non-zero constant ket")
    }

    pub fn z_up() -> StateVector {
        ket((1.0, 0.0), (0.0, 0.0), "↑", "↓")
    }
    pub fn z_down() -> StateVector {
        ket((0.0, 0.0), (1.0, 0.0), "↑", "↓")
    }
    pub fn x_up() -> StateVector {
        ket((H, 0.0), (H, 0.0), "↑", "↓")
    }
    pub fn x_down() -> StateVector {
        ket((H, 0.0), (-H, 0.0), "↑", "↓")
    }
    pub fn y_up() -> StateVector {
        ket((H, 0.0), (0.0, H), "↑", "↓")
    }
    pub fn y_down() -> StateVector {
        ket((H, 0.0), (0.0, -H), "↑", "↓")
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, trace, I};
    use crate::random::{random_hermitian, random_ket, rng};

    #[test]
    fn identity_tensor_identity() {
        let a = HermitianOperator::identity(2);
        let b = HermitianOperator::identity(3);
        assert_eq!(a.tensor(&b), HermitianOperator::identity(6));
    }

    #[test]
    fn tensor_labels_and_ordering() {
        let psi = spin::z_up().tensor(&spin::z_down());
        assert_eq!(psi.labels(), &["↑⊗↑", "↑⊗↓", "↓⊗↑", "↓⊗↓"]);
        assert_eq!(psi.amplitudes()[1], ONE);
        assert_eq!(psi.amplitudes().iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn trace_of_kronecker_factorises() {
        let mut r = rng(7);
        let a = random_hermitian(&mut r, 2);
        let b = random_hermitian(&mut r, 3);
        let ab = a.tensor(&b);
        // direct 6×6 trace
        let direct: f64 = (0..6).map(|i| ab.matrix()[(i, i)].re).sum();
        let factored = trace(a.matrix()).re * trace(b.matrix()).re;
        assert!((direct - factored).abs() < 1e-12);
    }

    #[test]
    fn product_state_detection() {
        let up_down = spin::z_up().tensor(&spin::z_down());
        let t = is_product_state(&up_down, (2, 2)).unwrap();
        assert!(t.is_product);
        let (a, b) = t.factors.unwrap();
        assert!((Projector::onto_state(&a).distance(&Projector::onto_state(&spin::z_up()))) < 1e-12);
        assert!((Projector::onto_state(&b).distance(&Projector::onto_state(&spin::z_down()))) < 1e-12);
        let rebuilt = a.tensor(&b);
        assert!(max_abs_diff(&rebuilt.outer(), &up_down.outer()) < 1e-12);

        let down_up = spin::z_down().tensor(&spin::z_up());
        let entangled = up_down.add(&down_up).unwrap().scaled(c(0.5f64.sqrt(), 0.0)).unwrap();
        let t = is_product_state(&entangled, (2, 2)).unwrap();
        assert!(!t.is_product);
        assert!(t.factors.is_none());
    }

    #[test]
    fn random_three_dim_product() {
        let mut r = rng(11);
        let a = random_ket(&mut r, 3);
        let b = random_ket(&mut r, 3);
        assert!(is_product_state(&a.tensor(&b), (3, 3)).unwrap().is_product);
    }

    #[test]
    fn product_split_mismatch() {
        let psi = random_ket(&mut rng(1), 6);
        assert!(matches!(
            is_product_state(&psi, (2, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sigma_z_pvm() {
        let (_, _, sz) = spin_half_operators();
        let pvm = pvm_from_hermitian(&sz).unwrap();
        assert_eq!(pvm.len(), 2);
        assert!((pvm.entries()[0].eigenvalue + 1.0).abs() < 1e-14);
        assert!((pvm.entries()[1].eigenvalue - 1.0).abs() < 1e-14);
        assert!(pvm.entries()[0].projector.distance(&Projector::onto_state(&spin::z_down())) < 1e-14);
        assert!(pvm.entries()[1].projector.distance(&Projector::onto_state(&spin::z_up())) < 1e-14);
    }

    #[test]
    fn identity_pvm_is_single_entry() {
        let pvm = pvm_from_hermitian(&HermitianOperator::identity(4)).unwrap();
        assert_eq!(pvm.len(), 1);
        assert!((pvm.entries()[0].eigenvalue - 1.0).abs() < 1e-14);
        assert_eq!(pvm.entries()[0].projector.rank(), 4);
        assert!(max_abs_diff(pvm.entries()[0].projector.matrix(), &identity(4)) < 1e-12);
    }

    #[test]
    fn random_pvm_reconstructs() {
        let mut r = rng(3);
        let a = random_hermitian(&mut r, 4);
        let pvm = pvm_from_hermitian(&a).unwrap();
        assert!(max_abs_diff(&pvm.reconstruct(), a.matrix()) < 1e-9);
    }

    #[test]
    fn degenerate_spectrum_grouped() {
        let (_, _, sz) = spin_half_operators();
        let big = sz.tensor(&HermitianOperator::identity(3));
        let pvm = pvm_from_hermitian(&big).unwrap();
        assert_eq!(pvm.len(), 2);
        assert_eq!(pvm.entries()[0].projector.rank(), 3);
        // validated constructor accepts the result
        let rebuilt = ProjectionValuedMeasure::from_entries(
            pvm.entries().iter().map(|e| (e.eigenvalue, e.projector.clone())).collect(),
        );
        assert!(rebuilt.is_ok());
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn joint_hamiltonian_cases() {
        let z = HermitianOperator::zero(2);
        assert_eq!(joint_hamiltonian(&z, &z), HermitianOperator::zero(4));
        let (_, _, sz) = spin_half_operators();
        let j = joint_hamiltonian(&sz, &z);
        assert_eq!(j, sz.tensor(&HermitianOperator::identity(2)));
    }

    #[test]
    fn joint_spectrum_is_pairwise_sums() {
        let mut r = rng(5);
        let h1 = random_hermitian(&mut r, 2);
        let h2 = random_hermitian(&mut r, 2);
        let (s1, s2) = (h1.spectrum(), h2.spectrum());
        let mut sums: Vec<f64> = s1.iter().flat_map(|a| s2.iter().map(move |b| a + b)).collect();
        sums.sort_by(f64::total_cmp);
        let joint = joint_hamiltonian(&h1, &h2).spectrum();
        for (a, b) in sums.iter().zip(&joint) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pauli_algebra() {
        let (sx, sy, sz) = spin_half_operators();
        let (x, y, z) = (sx.matrix(), sy.matrix(), sz.matrix());
        // With eigenvalues ±1 the commutators carry a factor 2; the spin
        // operators S = σ/2 obey [S_x, S_y] = i S_z exactly.
        let two_i = c(0.0, 2.0);
        assert_eq!(max_abs(&(commutator(x, y) - z * two_i)), 0.0);
        assert_eq!(max_abs(&(commutator(y, z) - x * two_i)), 0.0);
        assert_eq!(max_abs(&(commutator(z, x) - y * two_i)), 0.0);
        let half = c(0.5, 0.0);
        let (hx, hy, hz) = (x * half, y * half, z * half);
        assert_eq!(max_abs(&(commutator(&hx, &hy) - &hz * I)), 0.0);
        assert_eq!(max_abs(&(commutator(&hy, &hz) - &hx * I)), 0.0);
        assert_eq!(max_abs(&(commutator(&hz, &hx) - &hy * I)), 0.0);
        assert_eq!(x * x, identity(2));
        assert_eq!(sx.spectrum(), vec![-1.0, 1.0]);
        let e = spin::z_up().expectation(x).unwrap();
        assert_eq!(e, ZERO);
    }

    #[test]
    fn outcome_sets() {
        let s = OutcomeSet::point(1.0).union(OutcomeSet::open(-3.0, -1.0));
        assert!(s.contains(1.0 + 1e-12));
        assert!(s.contains(-2.0));
        assert!(!s.contains(-1.0));
        assert!(!s.contains(0.0));
        assert!(OutcomeSet::all().contains(1e300));
        assert!(!OutcomeSet::empty().contains(0.0));
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(identity(2)).is_err());
        let rho = DensityMatrix::from_ensemble(&[(0.5, spin::z_up()), (0.5, spin::z_down())]).unwrap();
        assert!(max_abs_diff(rho.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    }
}
