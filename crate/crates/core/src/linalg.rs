//! Dense complex linear-algebra helpers shared by the engines.
//!
//! Everything here works on `nalgebra` dynamic matrices of `Complex64`.
//! Spectral routines return eigenvalues in ascending order with eigenvectors
//! stored column-wise in the same order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Deviation of `m` from its own conjugate transpose.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Average `m` with its adjoint, killing rounding asymmetry.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Eigen-decomposition of a Hermitian matrix, sorted ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = symmetrize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function<F: Fn(f64) -> C64>(m: &CMatrix, f: F) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let fj = f(lambda);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    scaled * vectors.adjoint()
}

/// Singular values at or below this are zero whatever the matrix scale, so
/// rounding residue such as `1 − 1` is not mistaken for a direction.
const SVD_ABS_FLOOR: f64 = 1e-13;

fn svd_threshold(singular: &DVector<f64>, rel_tol: f64) -> f64 {
    let smax = singular.iter().cloned().fold(0.0, f64::max);
    (rel_tol * smax).max(SVD_ABS_FLOOR)
}

/// Orthonormal basis (as columns) of the column space of `m`.
///
/// Singular values below `rel_tol` times the largest are treated as zero.
pub fn range_basis(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let rows = m.nrows();
    if m.ncols() == 0 || max_abs(m) == 0.0 {
        return CMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let cut = svd_threshold(&svd.singular_values, rel_tol);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > cut)
        .collect();
    let mut basis = CMatrix::zeros(rows, keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        basis.set_column(dst, &u.column(k));
    }
    basis
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn null_space(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let cols = m.ncols();
    if max_abs(m) == 0.0 {
        return identity(cols);
    }
    // Pad to at least square so the SVD returns a full set of right vectors.
    let padded = if m.nrows() < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let cut = svd_threshold(&svd.singular_values, rel_tol);
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= cut)
        .collect();
    let mut basis = CMatrix::zeros(cols, null.len());
    for (dst, &k) in null.iter().enumerate() {
        let row = v_t.row(k);
        for i in 0..cols {
            basis[(i, dst)] = row[i].conj();
        }
    }
    basis
}

/// Orthogonal projector onto the span of orthonormal columns.
pub fn projector_from_basis(basis: &CMatrix) -> CMatrix {
    if basis.ncols() == 0 {
        return CMatrix::zeros(basis.nrows(), basis.nrows());
    }
    symmetrize(&(basis * basis.adjoint()))
}

/// `⟨a|b⟩`, antilinear in the first argument.
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

/// Stack two matrices with equal column counts.
pub fn vstack(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = CMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

/// Place two matrices with equal row counts side by side.
pub fn hstack(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

/// Row-major `[re, im]` pairs, the interchange form used by JSON documents.
pub fn to_pair_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Inverse of [`to_pair_rows`]; `None` when rows are ragged or empty.
pub fn from_pair_rows(rows: &[Vec<[f64; 2]>]) -> Option<CMatrix> {
    let n = rows.len();
    let m = rows.first()?.len();
    if m == 0 || rows.iter().any(|r| r.len() != m) {
        return None;
    }
    Some(CMatrix::from_fn(n, m, |i, j| c(rows[i][j][0], rows[i][j][1])))
}
