//! Projection-lattice operations, subspace measures and dispersion-free probes.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    check_dim, pvm_from_hermitian, spin_half_operators, DensityMatrix, HermitianOperator, OutcomeSet,
    Projector, StateVector, Tensor,
};
use crate::linalg::{self, c, CMatrix};
use crate::measurement::QuantumState;

/// Relative singular-value cutoff for subspace arithmetic.
pub const LATTICE_RANK_TOL: f64 = 1e-9;
pub const ADDITIVITY_TOL: f64 = 1e-9;
pub const COMMUTE_TOL: f64 = 1e-10;

/// The pair `(Â, Ω)` together with its projector.
#[derive(Clone, Debug)]
pub struct Assertion {
    pub operator: HermitianOperator,
    pub outcome_set: OutcomeSet,
    pub projector: Projector,
}

impl Assertion {
    pub fn new(operator: HermitianOperator, outcome_set: OutcomeSet) -> Result<Self> {
        let projector = pvm_from_hermitian(&operator)?.projector_for(&outcome_set);
        Ok(Self { operator, outcome_set, projector })
    }
}

/// `μ(P) = Tr(ρ̂P̂)`.
#[derive(Clone, Debug)]
pub struct SubspaceMeasure {
    rho: DensityMatrix,
}

impl SubspaceMeasure {
    pub fn new(rho: DensityMatrix) -> Self {
        Self { rho }
    }

    pub fn evaluate(&self, p: &Projector) -> Result<f64> {
        check_dim(self.rho.dim(), p.dim())?;
        Ok(self.rho.probability(p))
    }
}

/// Projector onto `range(p) ∩ range(q)`.
pub fn lattice_meet(p: &Projector, q: &Projector) -> Result<Projector> {
    check_dim(p.dim(), q.dim())?;
    let stacked = linalg::vstack(p.complement().matrix(), q.complement().matrix());
    let basis = linalg::null_space(&stacked, LATTICE_RANK_TOL);
    Projector::new(linalg::projector_from_basis(&basis))
}

/// Projector onto `range(p) + range(q)`.
pub fn lattice_join(p: &Projector, q: &Projector) -> Result<Projector> {
    check_dim(p.dim(), q.dim())?;
    let side = linalg::hstack(p.matrix(), q.matrix());
    let basis = linalg::range_basis(&side, LATTICE_RANK_TOL);
    Projector::new(linalg::projector_from_basis(&basis))
}

pub fn lattice_not(p: &Projector) -> Projector {
    p.complement()
}

#[derive(Clone, Debug, Serialize)]
pub struct AdditivityReport {
    pub mu_p: f64,
    pub mu_q: f64,
    pub mu_join: f64,
    pub additive: bool,
}

/// Compare `μ(p) + μ(q)` with `μ(p ∨ q)` for disjoint `p`, `q`.
pub fn additivity_probe(rho: &DensityMatrix, p: &Projector, q: &Projector) -> Result<AdditivityReport> {
    check_dim(rho.dim(), p.dim())?;
    let meet = lattice_meet(p, q)?;
    if meet.rank() > 0 {
        return Err(Error::NotDisjoint(meet.rank()));
    }
    let mu = SubspaceMeasure::new(rho.clone());
    let mu_p = mu.evaluate(p)?;
    let mu_q = mu.evaluate(q)?;
    let mu_join = mu.evaluate(&lattice_join(p, q)?)?;
    Ok(AdditivityReport { mu_p, mu_q, mu_join, additive: (mu_p + mu_q - mu_join).abs() < ADDITIVITY_TOL })
}

/// True iff every pair of projectors commutes.
pub fn is_boolean_family(projectors: &[Projector]) -> bool {
    projectors.iter().enumerate().all(|(i, p)| {
        projectors[i + 1..]
            .iter()
            .all(|q| p.dim() == q.dim() && linalg::max_abs(&linalg::commutator(p.matrix(), q.matrix())) < COMMUTE_TOL)
    })
}

/// Result of fitting `μ(P) ≈ Tr(ρP)` over sampled projectors.
#[derive(Clone, Debug)]
pub struct GleasonFit {
    /// Unit-trace Hermitian fit; not forced positive.
    pub rho: HermitianOperator,
    /// `max |Tr(ρP) − μ|` over the samples.
    pub residual: f64,
    /// Smallest eigenvalue of the fit; negative values flag non-positivity.
    pub min_eigenvalue: f64,
}

impl GleasonFit {
    pub fn density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.rho.matrix().clone())
    }
}

/// Real basis of the d×d Hermitian matrices: diagonals, symmetric and antisymmetric pairs.
fn hermitian_basis(dim: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(dim * dim);
    for k in 0..dim {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = linalg::ONE;
        out.push(m);
    }
    for j in 0..dim {
        for k in j + 1..dim {
            let mut s = CMatrix::zeros(dim, dim);
            s[(j, k)] = linalg::ONE;
            s[(k, j)] = linalg::ONE;
            out.push(s);
            let mut a = CMatrix::zeros(dim, dim);
            a[(j, k)] = c(0.0, -1.0);
            a[(k, j)] = c(0.0, 1.0);
            out.push(a);
        }
    }
    out
}

/// Least-squares Hermitian `ρ` with `Tr ρ = 1` reproducing the sampled measure.
pub fn gleason_fit(samples: &[(Projector, f64)], dim: usize) -> Result<GleasonFit> {
    if dim == 0 {
        return Err(Error::Empty);
    }
    let basis = hermitian_basis(dim);
    let n = basis.len();
    let m = samples.len();
    let mut a = DMatrix::<f64>::zeros(m, n);
    let mut b = DVector::<f64>::zeros(m);
    for (i, (p, mu)) in samples.iter().enumerate() {
        check_dim(dim, p.dim())?;
        for (j, e) in basis.iter().enumerate() {
            a[(i, j)] = linalg::trace(&(e * p.matrix())).re;
        }
        b[i] = *mu;
    }
    let rank = if m == 0 { 0 } else { a.clone().svd(false, false).rank(1e-10 * a.norm().max(1.0)) };
    if rank < n {
        return Err(Error::UnderDetermined { rank, needed: n });
    }
    // KKT system for min ‖Ax − b‖² subject to tᵀx = 1.
    let t = DVector::<f64>::from_fn(n, |j, _| if j < dim { 1.0 } else { 0.0 });
    let ata = a.transpose() * &a;
    let atb = a.transpose() * &b;
    let mut kkt = DMatrix::<f64>::zeros(n + 1, n + 1);
    kkt.view_mut((0, 0), (n, n)).copy_from(&(ata * 2.0));
    for j in 0..n {
        kkt[(j, n)] = t[j];
        kkt[(n, j)] = t[j];
    }
    let mut rhs = DVector::<f64>::zeros(n + 1);
    rhs.rows_mut(0, n).copy_from(&(atb * 2.0));
    rhs[n] = 1.0;
    let sol = kkt
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::UnderDetermined { rank, needed: n })?;
    let mut rho = CMatrix::zeros(dim, dim);
    for (j, e) in basis.iter().enumerate() {
        rho += e * c(sol[j], 0.0);
    }
    let rho = HermitianOperator::new(linalg::symmetrize(&rho))?;
    let residual = samples
        .iter()
        .map(|(p, mu)| (linalg::trace(&(rho.matrix() * p.matrix())).re - mu).abs())
        .fold(0.0, f64::max);
    let min_eigenvalue = rho.spectrum()[0];
    Ok(GleasonFit { rho, residual, min_eigenvalue })
}

/// A value assignment `V(Q̂)` for each named operator.
#[derive(Clone, Debug)]
pub struct DispersionFreeCandidate {
    entries: BTreeMap<String, (HermitianOperator, f64)>,
}

impl DispersionFreeCandidate {
    pub const SPECTRUM_TOL: f64 = 1e-9;

    pub fn new<S: Into<String>>(entries: Vec<(S, HermitianOperator, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (name, op, value) in entries {
            let name = name.into();
            if !op.spectrum().iter().any(|s| (s - value).abs() <= Self::SPECTRUM_TOL) {
                return Err(Error::NotInSpectrum { name, value });
            }
            map.insert(name, (op, value));
        }
        Ok(Self { entries: map })
    }

    pub fn value(&self, name: &str) -> Result<f64> {
        self.entries.get(name).map(|e| e.1).ok_or_else(|| Error::MissingOperator(name.into()))
    }

    pub fn operator(&self, name: &str) -> Result<&HermitianOperator> {
        self.entries.get(name).map(|e| &e.0).ok_or_else(|| Error::MissingOperator(name.into()))
    }

    pub fn assignment(&self) -> BTreeMap<String, f64> {
        self.entries.iter().map(|(k, v)| (k.clone(), v.1)).collect()
    }
}

/// Whether `V(P + Q) = V(P) + V(Q)`; the sum operator is located among the
/// candidate's entries by matrix equality.
pub fn vn_additivity_probe(candidate: &DispersionFreeCandidate, p: &str, q: &str) -> Result<bool> {
    let op_p = candidate.operator(p)?;
    let op_q = candidate.operator(q)?;
    check_dim(op_p.dim(), op_q.dim())?;
    let sum = op_p.matrix() + op_q.matrix();
    let v_sum = candidate
        .entries
        .values()
        .find(|(op, _)| op.dim() == sum.nrows() && linalg::max_abs_diff(op.matrix(), &sum) < 1e-9)
        .map(|e| e.1)
        .ok_or_else(|| Error::MissingOperator(format!("{p}+{q}")))?;
    Ok((candidate.value(p)? + candidate.value(q)? - v_sum).abs() < ADDITIVITY_TOL)
}

/// Count spectrum-valued assignments to `(P, Q, P+Q)` that are additive.
pub fn count_additive_assignments(p: &HermitianOperator, q: &HermitianOperator) -> Result<usize> {
    let sum = p.add(q)?;
    let mut count = 0;
    for &vp in &distinct(p.spectrum()) {
        for &vq in &distinct(q.spectrum()) {
            for &vs in &distinct(sum.spectrum()) {
                let cand = DispersionFreeCandidate::new(vec![
                    ("P", p.clone(), vp),
                    ("Q", q.clone(), vq),
                    ("P+Q", sum.clone(), vs),
                ])?;
                if vn_additivity_probe(&cand, "P", "Q")? {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

fn distinct(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| (*a - *b).abs() < 1e-8);
    values
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenvalueCheck {
    pub operator: String,
    pub expected: f64,
    /// `‖Ô|ψ⟩ − λ|ψ⟩‖`.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContradictionReport {
    /// `‖[A,B]‖`, `‖[A,C]‖`, `‖[B,C]‖` (max entry).
    pub commutator_norms: Vec<f64>,
    /// `max |ABC + σ₁ₓσ₂ₓσ₃ₓ|`.
    pub product_identity_error: f64,
    pub state_eigenvalue_checks: Vec<EigenvalueCheck>,
    pub satisfying_assignment_count: usize,
}

impl ContradictionReport {
    pub fn refutes(&self) -> bool {
        self.commutator_norms.iter().all(|&n| n < 1e-12)
            && self.product_identity_error < 1e-12
            && self.state_eigenvalue_checks.iter().all(|c| c.residual < 1e-10)
            && self.satisfying_assignment_count == 0
    }
}

/// The three-particle parity argument against predetermined spin values.
pub fn ghz_refutation() -> ContradictionReport {
    let (sx, sy, _) = spin_half_operators();
    let triple = |a: &HermitianOperator, b: &HermitianOperator, c: &HermitianOperator| a.tensor(b).tensor(c);
    let xyy = triple(&sx, &sy, &sy);
    let yxy = triple(&sy, &sx, &sy);
    let yyx = triple(&sy, &sy, &sx);
    let xxx = triple(&sx, &sx, &sx);

    let comm = |a: &HermitianOperator, b: &HermitianOperator| linalg::max_abs(&linalg::commutator(a.matrix(), b.matrix()));
    let commutator_norms = vec![comm(&xyy, &yxy), comm(&xyy, &yyx), comm(&yxy, &yyx)];

    let product = xyy.matrix() * yxy.matrix() * yyx.matrix();
    let product_identity_error = linalg::max_abs(&(product + xxx.matrix()));

    // Common +1 eigenspace of the three commuting operators.
    let id = linalg::identity(8);
    let half = c(0.5, 0.0);
    let proj = ((&id + xyy.matrix()) * half) * ((&id + yxy.matrix()) * half) * ((&id + yyx.matrix()) * half);
    let column = (0..8)
        .map(|k| proj.column(k).into_owned())
        .max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))
        .expect("8 columns");
    let psi = StateVector::from_vector(column).expect("common eigenspace is non-empty").normalized();

    let check = |name: &str, op: &HermitianOperator, expected: f64| {
        let applied = op.matrix() * psi.amplitudes();
        EigenvalueCheck {
            operator: name.to_string(),
            expected,
            residual: (applied - psi.amplitudes() * c(expected, 0.0)).norm(),
        }
    };
    let state_eigenvalue_checks = vec![
        check("x1 y2 y3", &xyy, 1.0),
        check("y1 x2 y3", &yxy, 1.0),
        check("y1 y2 x3", &yyx, 1.0),
        check("x1 x2 x3", &xxx, -1.0),
    ];

    let satisfying_assignment_count = (0u32..64)
        .filter(|bits| {
            let m = |k: u32| if bits >> k & 1 == 1 { -1i32 } else { 1 };
            let (m1x, m1y, m2x, m2y, m3x, m3y) = (m(0), m(1), m(2), m(3), m(4), m(5));
            m1x * m2y * m3y == 1 && m1y * m2x * m3y == 1 && m1y * m2y * m3x == 1 && m1x * m2x * m3x == -1
        })
        .count();

    ContradictionReport { commutator_norms, product_identity_error, state_eigenvalue_checks, satisfying_assignment_count }
}
