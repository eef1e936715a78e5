//! Dense complex helpers over `faer`, shared by the solver and the
//! phase-space code. All products run sequentially so results are
//! reproducible bit for bit.

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::DenseSolveCore;
use faer::{Accum, Mat, MatRef, Par, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = Mat<C64>;

pub fn zeros(n: usize) -> CMat {
    Mat::zeros(n, n)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

pub fn scaled_identity(n: usize, s: f64) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { C64::new(s, 0.0) } else { C64::new(0.0, 0.0) })
}

pub fn mul(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> CMat {
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, C64::new(1.0, 0.0), Par::Seq);
    out
}

/// `out += alpha * a * b`
pub fn mul_add(out: &mut CMat, a: MatRef<'_, C64>, b: MatRef<'_, C64>, alpha: C64) {
    matmul(out.as_mut(), Accum::Add, a, b, alpha, Par::Seq);
}

pub fn max_abs(m: &CMat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut best = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            best = best.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    best
}

/// `(m + m^H) / 2`
pub fn hermitian_part(m: &CMat) -> CMat {
    let n = m.nrows();
    Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Frobenius inner product `Re tr(a^H b)`.
pub fn inner(a: &CMat, b: &CMat) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let (x, y) = (a[(i, j)], b[(i, j)]);
            acc += x.re * y.re + x.im * y.im;
        }
    }
    acc
}

pub fn frobenius(a: &CMat) -> f64 {
    inner(a, a).sqrt()
}

pub fn trace(a: &CMat) -> C64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn eigvalsh(m: &CMat) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigenvalue solver failed: {e:?}")))
}

/// Full eigendecomposition, eigenvalues ascending, eigenvectors as columns.
pub fn eigh(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigen solver failed: {e:?}")))?;
    let s = evd.S();
    let vals = (0..m.nrows()).map(|i| s[i].re).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Smallest eigenvalue and a unit eigenvector whose largest-modulus entry
/// is real and positive.
pub fn min_eigenpair(m: &CMat) -> Result<(f64, Vec<C64>)> {
    let (vals, vecs) = eigh(m)?;
    let n = m.nrows();
    let mut v: Vec<C64> = (0..n).map(|i| vecs[(i, 0)]).collect();
    let pivot = v
        .iter()
        .enumerate()
        .fold((0usize, -1.0f64), |best, (i, z)| {
            if z.norm() > best.1 + 1e-14 {
                (i, z.norm())
            } else {
                best
            }
        })
        .0;
    let phase = v[pivot].conj() / v[pivot].norm();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z = *z * phase / norm;
    }
    Ok((vals[0], v))
}

/// Inverse through a Cholesky factorization; `None` when not positive definite.
pub fn cholesky_inverse(m: &CMat) -> Option<CMat> {
    m.llt(Side::Lower).ok().map(|l| l.inverse())
}

/// Largest `alpha <= cap` with `x + alpha * dx` positive semidefinite,
/// given `x` positive definite.
pub fn max_step(x: &CMat, dx: &CMat, cap: f64) -> Result<f64> {
    let llt = x
        .llt(Side::Lower)
        .map_err(|_| Error::Numerical("iterate lost positive definiteness".into()))?;
    let l = llt.L();
    let mut y = dx.clone();
    l.solve_lower_triangular_in_place(y.as_mut());
    let mut z = y.adjoint().to_owned();
    l.solve_lower_triangular_in_place(z.as_mut());
    let z = hermitian_part(&z);
    let lmin = eigvalsh(&z)?[0];
    Ok(if lmin < 0.0 { cap.min(-1.0 / lmin) } else { cap })
}

pub fn mat_vec(m: &CMat, v: &[C64]) -> Vec<C64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

/// True when the Cholesky factorization of `m` (lower triangle) succeeds.
pub fn is_positive_definite(m: &CMat) -> bool {
    m.llt(Side::Lower).is_ok()
}
