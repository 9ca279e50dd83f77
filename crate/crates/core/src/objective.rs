//! Convex objectives `f(x)` and constraint maps `g(x)` used to assemble
//! Lagrangians.

use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{fd_jacobian, sym_eig_extremes, Matrix, Vector};

/// A continuously differentiable convex function on `R^dim`.
pub trait ConvexObjective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Vector) -> f64;

    fn gradient(&self, x: &Vector) -> Vector;

    /// Central differences of the gradient unless overridden.
    fn hessian(&self, x: &Vector) -> Matrix {
        let jac = fd_jacobian(|p| Ok(self.gradient(p)), x, self.dim())
            .expect("gradient evaluation is infallible");
        (&jac + jac.transpose()) * 0.5
    }

    /// Strong convexity modulus, if known.
    fn mu(&self) -> Option<f64> {
        None
    }

    /// Lipschitz constant of the gradient, if known.
    fn l(&self) -> Option<f64> {
        None
    }
}

impl<T: ConvexObjective + ?Sized> ConvexObjective for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &Vector) -> Matrix {
        (**self).hessian(x)
    }
    fn mu(&self) -> Option<f64> {
        (**self).mu()
    }
    fn l(&self) -> Option<f64> {
        (**self).l()
    }
}

/// `f(x) = 1/2 x'Qx + p'x` with `Q` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    q: Matrix,
    p: Vector,
    mu: f64,
    l: f64,
}

impl QuadraticObjective {
    pub fn new(q: Matrix, p: Vector) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::DimensionMismatch {
                block: "quadratic form",
                expected: q.nrows(),
                found: q.ncols(),
            });
        }
        check_dim("linear term", q.nrows(), p.len())?;
        let asym = (&q - q.transpose()).amax();
        if asym > 1e-12 * (1.0 + q.amax()) {
            return Err(Error::InvalidParameter {
                name: "Q",
                reason: format!("not symmetric (max asymmetry {asym:e})"),
            });
        }
        let (lo, hi) = sym_eig_extremes(&q);
        if lo < -1e-12 * (1.0 + hi.abs()) {
            return Err(Error::InvalidParameter {
                name: "Q",
                reason: format!("not positive semidefinite (smallest eigenvalue {lo})"),
            });
        }
        Ok(Self {
            q,
            p,
            mu: lo.max(0.0),
            l: hi.max(0.0),
        })
    }

    /// `1/2 ||x||^2 * scale`.
    pub fn isotropic(dim: usize, scale: f64) -> Self {
        Self {
            q: Matrix::identity(dim, dim) * scale,
            p: Vector::zeros(dim),
            mu: scale,
            l: scale,
        }
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn p(&self) -> &Vector {
        &self.p
    }
}

impl ConvexObjective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.p.len()
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.q * x)) + self.p.dot(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        &self.q * x + &self.p
    }

    fn hessian(&self, _x: &Vector) -> Matrix {
        self.q.clone()
    }

    fn mu(&self) -> Option<f64> {
        Some(self.mu)
    }

    fn l(&self) -> Option<f64> {
        Some(self.l)
    }
}

/// `f(x) = 1/2 ||Ax - b||^2`, the least-squares data-fit term.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    a: Matrix,
    b: Vector,
    gram: Matrix,
    mu: f64,
    l: f64,
}

impl LeastSquares {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        check_dim("least-squares rows", a.nrows(), b.len())?;
        let gram = a.transpose() * &a;
        let (lo, hi) = sym_eig_extremes(&gram);
        Ok(Self {
            a,
            b,
            gram,
            mu: lo.max(0.0),
            l: hi.max(0.0),
        })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }
}

impl ConvexObjective for LeastSquares {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * (&self.a * x - &self.b).norm_squared()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.a.transpose() * (&self.a * x - &self.b)
    }

    fn hessian(&self, _x: &Vector) -> Matrix {
        self.gram.clone()
    }

    fn mu(&self) -> Option<f64> {
        Some(self.mu)
    }

    fn l(&self) -> Option<f64> {
        Some(self.l)
    }
}

type ObjValue = dyn Fn(&Vector) -> f64 + Send + Sync;
type ObjGrad = dyn Fn(&Vector) -> Vector + Send + Sync;

/// Objective assembled from closures.
#[derive(Clone)]
pub struct FnObjective {
    dim: usize,
    value: Arc<ObjValue>,
    grad: Arc<ObjGrad>,
    mu: Option<f64>,
    l: Option<f64>,
}

impl FnObjective {
    pub fn new<V, G>(dim: usize, value: V, grad: G) -> Self
    where
        V: Fn(&Vector) -> f64 + Send + Sync + 'static,
        G: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        Self {
            dim,
            value: Arc::new(value),
            grad: Arc::new(grad),
            mu: None,
            l: None,
        }
    }

    pub fn with_constants(mut self, mu: Option<f64>, l: Option<f64>) -> Self {
        self.mu = mu;
        self.l = l;
        self
    }
}

impl ConvexObjective for FnObjective {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (self.grad)(x)
    }
    fn mu(&self) -> Option<f64> {
        self.mu
    }
    fn l(&self) -> Option<f64> {
        self.l
    }
}

/// A vector of convex constraint functions `g(x) <= 0`.
pub trait ConstraintMap: Send + Sync {
    fn dim_in(&self) -> usize;

    fn dim_out(&self) -> usize;

    fn value(&self, x: &Vector) -> Vector;

    /// Rows are the constraint gradients.
    fn jacobian(&self, x: &Vector) -> Matrix;

    /// `sum_j y_j * hess g_j(x)`.
    fn weighted_hessian(&self, x: &Vector, y: &Vector) -> Matrix;
}

impl<T: ConstraintMap + ?Sized> ConstraintMap for Arc<T> {
    fn dim_in(&self) -> usize {
        (**self).dim_in()
    }
    fn dim_out(&self) -> usize {
        (**self).dim_out()
    }
    fn value(&self, x: &Vector) -> Vector {
        (**self).value(x)
    }
    fn jacobian(&self, x: &Vector) -> Matrix {
        (**self).jacobian(x)
    }
    fn weighted_hessian(&self, x: &Vector, y: &Vector) -> Matrix {
        (**self).weighted_hessian(x, y)
    }
}

/// `g(x) = Ax - b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineConstraints {
    pub a: Matrix,
    pub b: Vector,
}

impl AffineConstraints {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        check_dim("constraint rows", a.nrows(), b.len())?;
        Ok(Self { a, b })
    }
}

impl ConstraintMap for AffineConstraints {
    fn dim_in(&self) -> usize {
        self.a.ncols()
    }
    fn dim_out(&self) -> usize {
        self.a.nrows()
    }
    fn value(&self, x: &Vector) -> Vector {
        &self.a * x - &self.b
    }
    fn jacobian(&self, _x: &Vector) -> Matrix {
        self.a.clone()
    }
    fn weighted_hessian(&self, _x: &Vector, _y: &Vector) -> Matrix {
        Matrix::zeros(self.a.ncols(), self.a.ncols())
    }
}

/// `g_j(x) = 1/2 x'P_j x + a_j'x - b_j` with each `P_j` positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticConstraints {
    p: Vec<Matrix>,
    a: Matrix,
    b: Vector,
}

impl QuadraticConstraints {
    pub fn new(p: Vec<Matrix>, a: Matrix, b: Vector) -> Result<Self> {
        check_dim("constraint rows", a.nrows(), b.len())?;
        check_dim("constraint curvatures", a.nrows(), p.len())?;
        for pj in &p {
            check_dim("constraint curvature", a.ncols(), pj.nrows())?;
            check_dim("constraint curvature", a.ncols(), pj.ncols())?;
            let (lo, _) = sym_eig_extremes(pj);
            if lo < -1e-12 {
                return Err(Error::InvalidParameter {
                    name: "P_j",
                    reason: format!("constraint curvature is not convex (eigenvalue {lo})"),
                });
            }
        }
        Ok(Self { p, a, b })
    }

    /// Largest curvature among the constraints, `max_j lambda_max(P_j)`.
    pub fn max_curvature(&self) -> f64 {
        self.p.iter().map(|pj| sym_eig_extremes(pj).1).fold(0.0, f64::max)
    }
}

impl ConstraintMap for QuadraticConstraints {
    fn dim_in(&self) -> usize {
        self.a.ncols()
    }
    fn dim_out(&self) -> usize {
        self.a.nrows()
    }
    fn value(&self, x: &Vector) -> Vector {
        Vector::from_fn(self.b.len(), |j, _| {
            0.5 * x.dot(&(&self.p[j] * x)) + self.a.row(j).transpose().dot(x) - self.b[j]
        })
    }
    fn jacobian(&self, x: &Vector) -> Matrix {
        let mut jac = self.a.clone();
        for (j, pj) in self.p.iter().enumerate() {
            let g = pj * x;
            for k in 0..x.len() {
                jac[(j, k)] += g[k];
            }
        }
        jac
    }
    fn weighted_hessian(&self, x: &Vector, y: &Vector) -> Matrix {
        let mut h = Matrix::zeros(x.len(), x.len());
        for (pj, yj) in self.p.iter().zip(y.iter()) {
            h += pj * *yj;
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_constants_from_spectrum() {
        let q = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 5.0]);
        let f = QuadraticObjective::new(q, Vector::zeros(2)).unwrap();
        assert_eq!(f.mu(), Some(2.0));
        assert_eq!(f.l(), Some(5.0));
    }

    #[test]
    fn rejects_indefinite_quadratic() {
        let q = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(QuadraticObjective::new(q, Vector::zeros(2)).is_err());
    }

    #[test]
    fn least_squares_gradient_matches_differences() {
        let a = Matrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, 0.5, 0.3, 0.0]);
        let f = LeastSquares::new(a, Vector::from_vec(vec![1.0, 0.0, -2.0])).unwrap();
        let x = Vector::from_vec(vec![0.4, -0.2]);
        let h = 1e-6;
        for k in 0..2 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
            assert!((fd - f.gradient(&x)[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn quadratic_constraint_jacobian() {
        let g = QuadraticConstraints::new(
            vec![Matrix::identity(2, 2) * 2.0],
            Matrix::from_row_slice(1, 2, &[1.0, -1.0]),
            Vector::from_vec(vec![1.0]),
        )
        .unwrap();
        let x = Vector::from_vec(vec![1.0, 2.0]);
        assert_eq!(g.value(&x)[0], 0.5 * 2.0 * 5.0 - 1.0 - 1.0);
        let jac = g.jacobian(&x);
        assert_eq!((jac[(0, 0)], jac[(0, 1)]), (3.0, 3.0));
        assert_eq!(g.max_curvature(), 2.0);
    }
}
