//! Small dense helpers on top of nalgebra.

use nalgebra::DMatrix;

use crate::C64;

pub type CMat = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn from_rows(d: usize, entries: &[C64]) -> CMat {
    CMat::from_row_slice(d, d, entries)
}

pub fn mat_x() -> CMat {
    from_rows(2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn mat_y() -> CMat {
    from_rows(2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn mat_z() -> CMat {
    from_rows(2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

pub fn mat_h() -> CMat {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    from_rows(2, &[c(r, 0.), c(r, 0.), c(r, 0.), c(-r, 0.)])
}

pub fn mat_s() -> CMat {
    from_rows(2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)])
}

/// Square root of X: `(1+i)/2 [[1, -i], [-i, 1]]`.
pub fn mat_v() -> CMat {
    let a = c(0.5, 0.5);
    from_rows(2, &[a, a * c(0., -1.), a * c(0., -1.), a])
}

/// `|k><k|` on one qubit.
pub fn proj(k: usize) -> CMat {
    let mut m = CMat::zeros(2, 2);
    m[(k, k)] = c(1., 0.);
    m
}

/// Standard Kronecker product; `kron(a, b)` has `a` on the high index bits.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Tensor product of per-qubit matrices listed low qubit first.
pub fn kron_le(factors: &[CMat]) -> CMat {
    let mut m = identity(1);
    for f in factors {
        m = kron(f, &m);
    }
    m
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn unitarity_deviation(u: &CMat) -> f64 {
    let d = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &identity(d))
}

pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Eigenvalues of a Hermitian matrix (the anti-Hermitian part is dropped).
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()) * c(0.5, 0.);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b)).iter().map(|e| e.abs()).sum::<f64>()
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Numerical rank by eigenvalues above `tol` (Hermitian input).
pub fn hermitian_rank(m: &CMat, tol: f64) -> usize {
    hermitian_eigenvalues(m).iter().filter(|e| e.abs() > tol).count()
}

/// `|psi><psi|`.
pub fn outer(psi: &[C64]) -> CMat {
    let d = psi.len();
    CMat::from_fn(d, d, |i, j| psi[i] * psi[j].conj())
}

pub fn fidelity_pure(a: &[C64], b: &[C64]) -> f64 {
    let ip: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    ip.norm_sqr()
}
