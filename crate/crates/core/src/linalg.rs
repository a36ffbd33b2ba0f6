//! Complex linear-algebra helpers shared by the quantum-side modules.
//!
//! Everything here works on dense `DMatrix<Complex64>`; the systems in scope
//! are desk-scale (dimension a few hundred at most), so no sparse or
//! block-aware representations are used.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{KsError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest absolute entry. Used for all entrywise tolerance checks.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_residual(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    hermitian_residual(m) <= tol
}

/// `(m + m*)/2`; cleans up rounding drift on products of Hermitian matrices.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

pub fn trace_re(m: &CMatrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// `|v><v|` for a (not necessarily normalized) vector.
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a * b - b * a))
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order. Sorting makes downstream candidate streams
/// deterministic regardless of the backend's internal ordering.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let dim = m.nrows();
    let se = nalgebra::linalg::SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[j]
            .partial_cmp(&se.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(dim, dim);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &se.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(m);
    values.last().copied().unwrap_or(0.0)
}

/// Checks `m >= -tol` in the Loewner order (Hermitian input assumed).
pub fn is_psd(m: &CMatrix, tol: f64) -> bool {
    min_eigenvalue(m) >= -tol
}

/// Rank of an arbitrary matrix by singular-value counting.
/// `threshold` is absolute; callers pass it scaled to their data.
pub fn rank_svd(m: &CMatrix, threshold: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values.iter().filter(|&&s| s > threshold).count()
}

/// Orthonormal basis of the range of a Hermitian PSD matrix: eigenvectors
/// whose eigenvalues exceed `rel_threshold` times the largest eigenvalue.
pub fn range_basis(m: &CMatrix, rel_threshold: f64) -> CMatrix {
    let dim = m.nrows();
    let (values, vectors) = hermitian_eigen(m);
    let top = values.first().copied().unwrap_or(0.0).max(0.0);
    if top == 0.0 {
        return CMatrix::zeros(dim, 0);
    }
    let r = values.iter().filter(|&&v| v > rel_threshold * top).count();
    vectors.columns(0, r).into_owned()
}

/// Rank of the joint column span of several orthonormal bases.
pub fn joint_rank(bases: &[CMatrix], threshold: f64) -> usize {
    let total: usize = bases.iter().map(|b| b.ncols()).sum();
    if total == 0 {
        return 0;
    }
    let dim = bases[0].nrows();
    let mut stacked = CMatrix::zeros(dim, total);
    let mut col = 0;
    for b in bases {
        stacked.columns_mut(col, b.ncols()).copy_from(b);
        col += b.ncols();
    }
    rank_svd(&stacked, threshold)
}

/// Spectral data of a PSD matrix restricted to its support:
/// the support projector, `sqrt(m)`, the pseudo-inverse of `sqrt(m)`,
/// and the support rank.
pub struct SupportCalculus {
    pub projector: CMatrix,
    pub sqrt: CMatrix,
    pub sqrt_pinv: CMatrix,
    pub rank: usize,
    /// Orthonormal basis of the support, one column per dimension.
    pub basis: CMatrix,
}

pub fn support_calculus(m: &CMatrix, rel_threshold: f64) -> SupportCalculus {
    let dim = m.nrows();
    let (values, vectors) = hermitian_eigen(m);
    let top = values.first().copied().unwrap_or(0.0).max(0.0);
    let cut = rel_threshold * top;
    let mut projector = CMatrix::zeros(dim, dim);
    let mut sqrt = CMatrix::zeros(dim, dim);
    let mut sqrt_pinv = CMatrix::zeros(dim, dim);
    let mut rank = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > cut && v > 0.0 {
            let col = vectors.column(i);
            let p = &col * col.adjoint();
            projector += &p;
            sqrt += &p * Complex64::new(v.sqrt(), 0.0);
            sqrt_pinv += &p * Complex64::new(1.0 / v.sqrt(), 0.0);
            rank += 1;
        }
    }
    let basis = vectors.columns(0, rank).into_owned();
    SupportCalculus {
        projector,
        sqrt,
        sqrt_pinv,
        rank,
        basis,
    }
}

/// Residual of `U* U = 1`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

pub fn check_square(m: &CMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(KsError::ShapeMismatch(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Standard complex Gaussian matrix from a seeded RNG.
pub fn random_gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

/// Haar-ish random unitary: QR of a complex Gaussian matrix with the phase
/// convention fixed so the stream is reproducible.
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let g = random_gaussian(dim, dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..dim {
                q[(i, j)] *= phase.conj();
            }
        }
    }
    q
}

/// Random PSD matrix of the given rank with eigenvalues bounded away from
/// zero; used by the verification battery.
pub fn random_psd<R: Rng>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    let u = random_unitary(dim, rng);
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..rank.min(dim) {
        let col = u.column(i);
        let ev = 0.2 + 0.8 * rng.random::<f64>();
        m += (&col * col.adjoint()) * Complex64::new(ev, 0.0);
    }
    m
}
