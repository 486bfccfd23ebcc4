//! Complex matrix aliases and small dense helpers shared across modules.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest absolute deviation of `a` from Hermitian symmetry.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..a.nrows() {
        for c in r..a.ncols() {
            worst = worst.max((a[(r, c)] - a[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Real embedding `[[Re A, -Im A], [Im A, Re A]]` of a complex matrix.
pub fn real_embedding(a: &CMatrix) -> DMatrix<f64> {
    let (r, c) = a.shape();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = a[(i, j)];
            out[(i, j)] = z.re;
            out[(i, j + c)] = -z.im;
            out[(i + r, j)] = z.im;
            out[(i + r, j + c)] = z.re;
        }
    }
    out
}

/// Stack real and imaginary parts: `[Re v; Im v]`.
pub fn stack_real(v: &CVector) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

/// Inverse of [`stack_real`].
pub fn unstack_real(x: &DVector<f64>) -> CVector {
    let n = x.len() / 2;
    CVector::from_fn(n, |i, _| C64::new(x[i], x[i + n]))
}

/// Ratio of extreme singular values.
pub fn condition_number(a: &CMatrix) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Smallest eigenvalue of a complex Hermitian matrix (via its real embedding).
pub fn min_eigenvalue_hermitian(a: &CMatrix) -> f64 {
    min_eigenvalue(&real_embedding(a))
}
