//! Small dense linear-algebra helpers shared by the builders and inner solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::Result;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn sym_eig_extremes(m: &Matrix) -> (f64, f64) {
    if m.nrows() == 0 {
        return (0.0, 0.0);
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Numerical rank with relative threshold on singular values.
pub fn rank(m: &Matrix, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Solves `h d = rhs` for a symmetric positive definite `h`, falling back to LU
/// when the Cholesky factorization fails.
pub fn solve_spd(h: &Matrix, rhs: &Vector) -> Option<Vector> {
    if let Some(chol) = h.clone().cholesky() {
        return Some(chol.solve(rhs));
    }
    h.clone().lu().solve(rhs)
}

/// Central-difference Jacobian of `f` at `x`, with step `1e-6 (1 + |x|)`.
pub fn fd_jacobian<F>(f: F, x: &Vector, out_dim: usize) -> Result<Matrix>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    let h = 1e-6 * (1.0 + x.norm());
    let mut jac = Matrix::zeros(out_dim, x.len());
    let mut probe = x.clone();
    for j in 0..x.len() {
        probe[j] = x[j] + h;
        let plus = f(&probe)?;
        probe[j] = x[j] - h;
        let minus = f(&probe)?;
        probe[j] = x[j];
        jac.set_column(j, &((plus - minus) / (2.0 * h)));
    }
    Ok(jac)
}

/// Concatenates two vectors.
pub fn stack(a: &Vector, b: &Vector) -> Vector {
    let mut out = Vector::zeros(a.len() + b.len());
    out.rows_mut(0, a.len()).copy_from(a);
    out.rows_mut(a.len(), b.len()).copy_from(b);
    out
}

/// Splits a vector at `at` into owned halves.
pub fn split(z: &Vector, at: usize) -> (Vector, Vector) {
    let head = z.rows(0, at).into_owned();
    let tail = z.rows(at, z.len() - at).into_owned();
    (head, tail)
}

/// Block-diagonal matrix `diag(a, b)`.
pub fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = Matrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Vertical concatenation `[a; b]`.
pub fn vstack(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.ncols(), b.ncols(), "vstack column mismatch");
    let mut out = Matrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}
