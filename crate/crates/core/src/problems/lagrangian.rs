//! Lagrangians of constrained programs, viewed as saddle problems over
//! `(x, y)` with sign-constrained inequality multipliers.

use std::sync::Arc;

use crate::error::{check_dim, Result};
use crate::linalg::{stack, vstack, Matrix, Vector};
use crate::objective::{ConstraintMap, ConvexObjective};
use crate::projection::FeasibleSet;
use crate::saddle::{ConvexityMeta, Gradient, SaddleProblem};

/// `L(x, y) = c'x + y_eq'(A_eq x - b_eq) + y_in'(A_in x - b_in)` with
/// `y = (y_eq, y_in)`, `y_eq` free and `y_in >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearLagrangian {
    c: Vector,
    a_eq: Matrix,
    b_eq: Vector,
    a_in: Matrix,
    b_in: Vector,
    a: Matrix,
    b: Vector,
}

impl LinearLagrangian {
    pub fn new(c: Vector, a_eq: Matrix, b_eq: Vector, a_in: Matrix, b_in: Vector) -> Result<Self> {
        let n = c.len();
        check_dim("equality columns", n, a_eq.ncols())?;
        check_dim("equality rows", a_eq.nrows(), b_eq.len())?;
        check_dim("inequality columns", n, a_in.ncols())?;
        check_dim("inequality rows", a_in.nrows(), b_in.len())?;
        let a = vstack(&a_eq, &a_in);
        let b = stack(&b_eq, &b_in);
        Ok(Self {
            c,
            a_eq,
            b_eq,
            a_in,
            b_in,
            a,
            b,
        })
    }

    /// Inequality rows only: `c'x + y'(Ax - b)`, `y >= 0`.
    pub fn inequality(c: Vector, a: Matrix, b: Vector) -> Result<Self> {
        let n = c.len();
        Self::new(c, Matrix::zeros(0, n), Vector::zeros(0), a, b)
    }

    pub fn c(&self) -> &Vector {
        &self.c
    }

    pub fn n_eq(&self) -> usize {
        self.a_eq.nrows()
    }

    pub fn n_in(&self) -> usize {
        self.a_in.nrows()
    }

    pub fn a_eq(&self) -> &Matrix {
        &self.a_eq
    }

    pub fn b_eq(&self) -> &Vector {
        &self.b_eq
    }

    pub fn a_in(&self) -> &Matrix {
        &self.a_in
    }

    pub fn b_in(&self) -> &Vector {
        &self.b_in
    }

    /// Multiplier box: `R^{n_eq} x R^{n_in}_{>=0}`.
    pub fn dual_set(&self) -> FeasibleSet {
        FeasibleSet::unbounded(self.n_eq()).product(&FeasibleSet::orthant(self.n_in()))
    }
}

impl SaddleProblem for LinearLagrangian {
    fn dims(&self) -> (usize, usize) {
        (self.c.len(), self.a.nrows())
    }

    fn value(&self, x: &Vector, y: &Vector) -> Result<f64> {
        check_dim("x", self.c.len(), x.len())?;
        check_dim("y", self.a.nrows(), y.len())?;
        Ok(self.c.dot(x) + y.dot(&(&self.a * x - &self.b)))
    }

    fn gradient(&self, x: &Vector, y: &Vector) -> Result<Gradient> {
        check_dim("x", self.c.len(), x.len())?;
        check_dim("y", self.a.nrows(), y.len())?;
        Ok(Gradient {
            x: &self.c + self.a.transpose() * y,
            y: &self.a * x - &self.b,
        })
    }

    fn meta(&self) -> ConvexityMeta {
        ConvexityMeta {
            mu: Some(0.0),
            q: Some(0.0),
            l: Some(0.0),
            kappa: None,
            sigma: None,
        }
    }

    fn domain(&self) -> Option<FeasibleSet> {
        Some(FeasibleSet::unbounded(self.c.len()).product(&self.dual_set()))
    }

    fn hess_xx(&self, _x: &Vector, _y: &Vector) -> Result<Matrix> {
        Ok(Matrix::zeros(self.c.len(), self.c.len()))
    }

    fn hess_yy(&self, _x: &Vector, _y: &Vector) -> Result<Matrix> {
        Ok(Matrix::zeros(self.a.nrows(), self.a.nrows()))
    }
}

/// `L(x, y) = f(x) + y'g(x)` with `y >= 0`, for `min f(x) s.t. g(x) <= 0`.
#[derive(Clone)]
pub struct ConvexLagrangian {
    f: Arc<dyn ConvexObjective>,
    g: Arc<dyn ConstraintMap>,
}

impl ConvexLagrangian {
    pub fn new(f: Arc<dyn ConvexObjective>, g: Arc<dyn ConstraintMap>) -> Result<Self> {
        check_dim("constraint input", f.dim(), g.dim_in())?;
        Ok(Self { f, g })
    }

    pub fn objective(&self) -> &Arc<dyn ConvexObjective> {
        &self.f
    }

    pub fn constraints(&self) -> &Arc<dyn ConstraintMap> {
        &self.g
    }
}

impl SaddleProblem for ConvexLagrangian {
    fn dims(&self) -> (usize, usize) {
        (self.f.dim(), self.g.dim_out())
    }

    fn value(&self, x: &Vector, y: &Vector) -> Result<f64> {
        check_dim("x", self.f.dim(), x.len())?;
        check_dim("y", self.g.dim_out(), y.len())?;
        Ok(self.f.value(x) + y.dot(&self.g.value(x)))
    }

    fn gradient(&self, x: &Vector, y: &Vector) -> Result<Gradient> {
        check_dim("x", self.f.dim(), x.len())?;
        check_dim("y", self.g.dim_out(), y.len())?;
        Ok(Gradient {
            x: self.f.gradient(x) + self.g.jacobian(x).transpose() * y,
            y: self.g.value(x),
        })
    }

    fn meta(&self) -> ConvexityMeta {
        ConvexityMeta {
            mu: self.f.mu(),
            q: Some(0.0),
            l: None,
            kappa: None,
            sigma: None,
        }
    }

    fn domain(&self) -> Option<FeasibleSet> {
        Some(FeasibleSet::unbounded(self.f.dim()).product(&FeasibleSet::orthant(self.g.dim_out())))
    }

    fn hess_xx(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        Ok(self.f.hessian(x) + self.g.weighted_hessian(x, y))
    }

    fn hess_yy(&self, _x: &Vector, _y: &Vector) -> Result<Matrix> {
        let m = self.g.dim_out();
        Ok(Matrix::zeros(m, m))
    }
}
