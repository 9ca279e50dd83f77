//! Reduction by partial minimization over the strongly convex block `x_s` of
//! `f_s(x_s) + f_c(x_c) + y'(A_s x_s + A_c x_c - b)`, `y >= 0`.
//!
//! The reduced function is `L_bar(x_c, y) = L(x_bar_s(y), x_c, y)` where
//! `grad f_s(x_bar_s(y)) + A_s'y = 0`.

use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{rank, stack, sym_eig_extremes, Matrix, Vector};
use crate::objective::ConvexObjective;
use crate::projection::FeasibleSet;
use crate::saddle::{ConvexityMeta, Gradient, SaddleProblem};
use crate::transforms::inner::{damped_newton, starting_point, InnerSolveConfig, WarmStart};

/// `min f_s(x_s) + f_c(x_c)  s.t.  A_s x_s + A_c x_c - b <= 0`.
#[derive(Clone)]
pub struct SeparableProblem {
    pub f_s: Arc<dyn ConvexObjective>,
    pub f_c: Arc<dyn ConvexObjective>,
    pub a_s: Matrix,
    pub a_c: Matrix,
    pub b: Vector,
    kappa_s: f64,
    sigma_s: f64,
}

impl SeparableProblem {
    pub fn new(
        f_s: Arc<dyn ConvexObjective>,
        f_c: Arc<dyn ConvexObjective>,
        a_s: Matrix,
        a_c: Matrix,
        b: Vector,
    ) -> Result<Self> {
        check_dim("A_s columns", f_s.dim(), a_s.ncols())?;
        check_dim("A_c columns", f_c.dim(), a_c.ncols())?;
        check_dim("A_c rows", a_s.nrows(), a_c.nrows())?;
        check_dim("b", a_s.nrows(), b.len())?;
        if rank(&a_s, 1e-10) < a_s.nrows() {
            return Err(Error::RankDeficient("A_s"));
        }
        let (kappa_s, sigma_s) = sym_eig_extremes(&(&a_s * a_s.transpose()));
        Ok(Self {
            f_s,
            f_c,
            a_s,
            a_c,
            b,
            kappa_s,
            sigma_s,
        })
    }

    /// Extreme eigenvalues `(kappa_s, sigma_s)` of `A_s A_s'`.
    pub fn gram_bounds(&self) -> (f64, f64) {
        (self.kappa_s, self.sigma_s)
    }

    pub fn n_s(&self) -> usize {
        self.a_s.ncols()
    }

    pub fn n_c(&self) -> usize {
        self.a_c.ncols()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }
}

/// The reduced function over `(x_c, y)`.
#[derive(Clone)]
pub struct Reduced {
    sep: SeparableProblem,
    inner: InnerSolveConfig,
    warm: WarmStart,
}

pub fn reduce(sep: SeparableProblem, inner: InnerSolveConfig) -> Result<Reduced> {
    inner.validate()?;
    Ok(Reduced {
        sep,
        inner,
        warm: WarmStart::default(),
    })
}

impl Reduced {
    pub fn separable(&self) -> &SeparableProblem {
        &self.sep
    }

    /// `x_bar_s(y)`, the minimizer of `f_s(x_s) + y'A_s x_s`.
    pub fn x_bar_s(&self, y: &Vector) -> Result<Vector> {
        check_dim("y", self.sep.m(), y.len())?;
        let guess = Vector::zeros(self.sep.n_s());
        let x0 = starting_point(&self.inner, &self.warm, &guess);
        let aty = self.sep.a_s.transpose() * y;
        let x = damped_newton(
            |x| Ok(self.sep.f_s.gradient(x) + &aty),
            |x| Ok(self.sep.f_s.hessian(x)),
            x0,
            &self.inner,
        )?;
        if self.inner.warm_start {
            self.warm.set(&x);
        }
        Ok(x)
    }

    /// Full primal point `(x_bar_s(y), x_c)`.
    pub fn recover(&self, x_c: &Vector, y: &Vector) -> Result<Vector> {
        Ok(stack(&self.x_bar_s(y)?, x_c))
    }
}

impl SaddleProblem for Reduced {
    fn dims(&self) -> (usize, usize) {
        (self.sep.n_c(), self.sep.m())
    }

    fn value(&self, x_c: &Vector, y: &Vector) -> Result<f64> {
        check_dim("x_c", self.sep.n_c(), x_c.len())?;
        let xs = self.x_bar_s(y)?;
        let slack = &self.sep.a_s * &xs + &self.sep.a_c * x_c - &self.sep.b;
        Ok(self.sep.f_s.value(&xs) + self.sep.f_c.value(x_c) + y.dot(&slack))
    }

    fn gradient(&self, x_c: &Vector, y: &Vector) -> Result<Gradient> {
        check_dim("x_c", self.sep.n_c(), x_c.len())?;
        let xs = self.x_bar_s(y)?;
        Ok(Gradient {
            x: self.sep.f_c.gradient(x_c) + self.sep.a_c.transpose() * y,
            y: &self.sep.a_s * &xs + &self.sep.a_c * x_c - &self.sep.b,
        })
    }

    fn meta(&self) -> ConvexityMeta {
        let q = match self.sep.f_s.l() {
            Some(l_s) if l_s > 0.0 => Some(self.sep.kappa_s / l_s),
            _ => None,
        };
        ConvexityMeta {
            mu: self.sep.f_c.mu(),
            q,
            l: self.sep.f_c.l(),
            kappa: Some(self.sep.kappa_s),
            sigma: Some(self.sep.sigma_s),
        }
    }

    fn domain(&self) -> Option<FeasibleSet> {
        Some(FeasibleSet::unbounded(self.sep.n_c()).product(&FeasibleSet::orthant(self.sep.m())))
    }

    fn hess_xx(&self, x_c: &Vector, _y: &Vector) -> Result<Matrix> {
        Ok(self.sep.f_c.hessian(x_c))
    }

    fn hess_yy(&self, _x_c: &Vector, y: &Vector) -> Result<Matrix> {
        // d x_bar_s / dy = -H_s^-1 A_s'
        let xs = self.x_bar_s(y)?;
        let hs = self.sep.f_s.hessian(&xs);
        let sol = hs
            .lu()
            .solve(&self.sep.a_s.transpose())
            .ok_or(Error::RankDeficient("hess f_s"))?;
        Ok(-(&self.sep.a_s * sol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::QuadraticObjective;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn scalar() -> Reduced {
        let sep = SeparableProblem::new(
            Arc::new(QuadraticObjective::isotropic(1, 1.0)),
            Arc::new(QuadraticObjective::isotropic(1, 1.0)),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
            v(&[0.0]),
        )
        .unwrap();
        reduce(sep, InnerSolveConfig::default()).unwrap()
    }

    #[test]
    fn partial_minimizer_example() {
        assert!((scalar().x_bar_s(&v(&[2.0])).unwrap()[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_gradient_examples() {
        let g = scalar().gradient(&v(&[1.0]), &v(&[1.0])).unwrap();
        assert!(g.y[0].abs() < 1e-12);
        assert!((g.x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_block_rejected() {
        let err = SeparableProblem::new(
            Arc::new(QuadraticObjective::isotropic(1, 1.0)),
            Arc::new(QuadraticObjective::isotropic(1, 1.0)),
            Matrix::from_row_slice(2, 1, &[1.0, 2.0]),
            Matrix::from_row_slice(2, 1, &[1.0, 0.0]),
            v(&[0.0, 0.0]),
        )
        .err()
        .unwrap();
        assert_eq!(err, Error::RankDeficient("A_s"));
    }
}
