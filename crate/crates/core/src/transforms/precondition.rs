//! Change of variables `u = x + alpha A'y` applied to the Lagrangian
//! `f(x) + eta y'(Ax - b)`, which gives
//!
//! `L~(u, y) = f(u - alpha A'y) + eta y'(Au - b) - eta alpha ||A'y||^2`.
//!
//! The dual block defaults to the nonnegative orthant (constraints
//! `Ax - b <= 0`); other boxes can be supplied.

use std::sync::Arc;

use crate::error::{check_dim, check_positive, Error, Result};
use crate::linalg::{sym_eig_extremes, Matrix, Vector};
use crate::objective::ConvexObjective;
use crate::projection::FeasibleSet;
use crate::saddle::{ConvexityMeta, Gradient, PointZ, SaddleProblem};

#[derive(Clone)]
pub struct Preconditioned {
    f: Arc<dyn ConvexObjective>,
    a: Matrix,
    b: Vector,
    eta: f64,
    alpha: f64,
    dual_set: FeasibleSet,
    kappa: f64,
    sigma: f64,
}

pub fn precondition(
    f: Arc<dyn ConvexObjective>,
    a: Matrix,
    b: Vector,
    eta: f64,
    alpha: f64,
) -> Result<Preconditioned> {
    check_positive("eta", eta)?;
    check_positive("alpha", alpha)?;
    check_dim("constraint columns", f.dim(), a.ncols())?;
    check_dim("constraint rows", a.nrows(), b.len())?;
    let (kappa, sigma) = sym_eig_extremes(&(&a * a.transpose()));
    let m = a.nrows();
    Ok(Preconditioned {
        f,
        a,
        b,
        eta,
        alpha,
        dual_set: FeasibleSet::orthant(m),
        kappa: kappa.max(0.0),
        sigma: sigma.max(0.0),
    })
}

impl Preconditioned {
    /// Replaces the dual box (default: nonnegative orthant).
    pub fn with_dual_set(mut self, set: FeasibleSet) -> Result<Self> {
        check_dim("dual set", self.a.nrows(), set.dim())?;
        self.dual_set = set;
        Ok(self)
    }

    pub fn objective(&self) -> &Arc<dyn ConvexObjective> {
        &self.f
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dual_set(&self) -> &FeasibleSet {
        &self.dual_set
    }

    /// Extreme eigenvalues `(kappa, sigma)` of `AA'`.
    pub fn gram_bounds(&self) -> (f64, f64) {
        (self.kappa, self.sigma)
    }

    /// `x = u - alpha A'y`.
    pub fn to_x(&self, u: &Vector, y: &Vector) -> Vector {
        u - self.a.transpose() * y * self.alpha
    }

    /// `u = x + alpha A'y`.
    pub fn to_u(&self, x: &Vector, y: &Vector) -> Vector {
        x + self.a.transpose() * y * self.alpha
    }

    /// Checks the concavity condition `2 eta > l alpha`.
    pub fn check_concavity(&self) -> Result<()> {
        let l = self.f.l().ok_or(Error::MissingConstant("l"))?;
        if 2.0 * self.eta > l * self.alpha {
            Ok(())
        } else {
            Err(Error::ConditionViolated(format!(
                "2 eta > l alpha fails: 2 * {} <= {} * {}",
                self.eta, l, self.alpha
            )))
        }
    }
}

impl SaddleProblem for Preconditioned {
    fn dims(&self) -> (usize, usize) {
        (self.a.ncols(), self.a.nrows())
    }

    fn value(&self, u: &Vector, y: &Vector) -> Result<f64> {
        check_dim("u", self.a.ncols(), u.len())?;
        check_dim("y", self.a.nrows(), y.len())?;
        let aty = self.a.transpose() * y;
        let x = u - &aty * self.alpha;
        Ok(self.f.value(&x) + self.eta * y.dot(&(&self.a * u - &self.b))
            - self.eta * self.alpha * aty.norm_squared())
    }

    fn gradient(&self, u: &Vector, y: &Vector) -> Result<Gradient> {
        check_dim("u", self.a.ncols(), u.len())?;
        check_dim("y", self.a.nrows(), y.len())?;
        let aty = self.a.transpose() * y;
        let x = u - &aty * self.alpha;
        let gf = self.f.gradient(&x);
        let gu = &gf + &aty * self.eta;
        let gy = &self.a * &gf * (-self.alpha) + (&self.a * u - &self.b) * self.eta
            - &self.a * &aty * (2.0 * self.eta * self.alpha);
        Ok(Gradient { x: gu, y: gy })
    }

    fn meta(&self) -> ConvexityMeta {
        ConvexityMeta {
            mu: self.f.mu(),
            q: None,
            l: self.f.l(),
            kappa: Some(self.kappa),
            sigma: Some(self.sigma),
        }
    }

    fn domain(&self) -> Option<FeasibleSet> {
        Some(FeasibleSet::unbounded(self.a.ncols()).product(&self.dual_set))
    }

    fn known_saddle(&self) -> Option<PointZ> {
        None
    }

    fn hess_xx(&self, u: &Vector, y: &Vector) -> Result<Matrix> {
        Ok(self.f.hessian(&self.to_x(u, y)))
    }

    fn hess_yy(&self, u: &Vector, y: &Vector) -> Result<Matrix> {
        let h = self.f.hessian(&self.to_x(u, y));
        let aat = &self.a * self.a.transpose();
        Ok(&self.a * h * self.a.transpose() * (self.alpha * self.alpha)
            - aat * (2.0 * self.eta * self.alpha))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::QuadraticObjective;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn scalar(eta: f64, alpha: f64) -> Preconditioned {
        precondition(
            Arc::new(QuadraticObjective::isotropic(1, 1.0)),
            Matrix::from_element(1, 1, 1.0),
            v(&[0.0]),
            eta,
            alpha,
        )
        .unwrap()
    }

    #[test]
    fn gradient_examples() {
        let p = scalar(1.0, 1.0);
        let g = p.gradient(&v(&[0.0]), &v(&[0.0])).unwrap();
        assert_eq!((g.x[0], g.y[0]), (0.0, 0.0));
        let g = p.gradient(&v(&[1.0]), &v(&[0.0])).unwrap();
        assert_eq!((g.x[0], g.y[0]), (1.0, 0.0));
        let g = p.gradient(&v(&[0.0]), &v(&[1.0])).unwrap();
        assert_eq!((g.x[0], g.y[0]), (0.0, -1.0));
    }

    #[test]
    fn concavity_condition() {
        assert!(scalar(1.5, 1.0).check_concavity().is_ok());
        assert!(matches!(scalar(0.4, 1.0).check_concavity(), Err(Error::ConditionViolated(_))));
    }

    #[test]
    fn change_of_variables_round_trip() {
        let p = scalar(1.0, 0.7);
        let (x, y) = (v(&[0.3]), v(&[1.2]));
        assert!((p.to_x(&p.to_u(&x, &y), &y) - x).norm() < 1e-15);
    }
}
