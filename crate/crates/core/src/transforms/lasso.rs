//! Lasso reformulation and the dual proximal regularization used by the Lasso
//! pipeline.
//!
//! The penalty `lambda ||x_hat||_1` is split with `x_hat = x_bar_plus - x_bar_minus`,
//! `x_bar >= 0`, giving a smooth objective over `x = (x_hat, x_bar_plus, x_bar_minus)`
//! with constraints `x_hat + C x_bar = 0` (free multipliers) and `-x_bar <= 0`
//! (nonnegative multipliers), `C = [-I, I]`.

use std::sync::Arc;

use crate::error::{check_dim, check_positive, Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::objective::ConvexObjective;
use crate::projection::FeasibleSet;
use crate::saddle::{Gradient, SaddleProblem};
use crate::transforms::inner::{projected_newton_max, starting_point, InnerSolveConfig, WarmStart};

/// `f(x_hat, x_bar) = f_hat(x_hat) + lambda 1'x_bar`.
#[derive(Clone)]
pub struct LassoSplitObjective {
    fhat: Arc<dyn ConvexObjective>,
    lambda: f64,
}

impl LassoSplitObjective {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn fhat(&self) -> &Arc<dyn ConvexObjective> {
        &self.fhat
    }
}

impl ConvexObjective for LassoSplitObjective {
    fn dim(&self) -> usize {
        3 * self.fhat.dim()
    }

    fn value(&self, x: &Vector) -> f64 {
        let n = self.fhat.dim();
        self.fhat.value(&x.rows(0, n).into_owned()) + self.lambda * x.rows(n, 2 * n).sum()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let n = self.fhat.dim();
        let mut g = Vector::from_element(3 * n, self.lambda);
        g.rows_mut(0, n).copy_from(&self.fhat.gradient(&x.rows(0, n).into_owned()));
        g
    }

    fn hessian(&self, x: &Vector) -> Matrix {
        let n = self.fhat.dim();
        let mut h = Matrix::zeros(3 * n, 3 * n);
        h.view_mut((0, 0), (n, n))
            .copy_from(&self.fhat.hessian(&x.rows(0, n).into_owned()));
        h
    }

    fn mu(&self) -> Option<f64> {
        Some(0.0)
    }

    fn l(&self) -> Option<f64> {
        self.fhat.l()
    }
}

/// Output of [`lasso_reformulate`].
#[derive(Clone)]
pub struct LassoReformulation {
    pub f: Arc<LassoSplitObjective>,
    /// `[[I, C], [0, -I_2n]]`.
    pub a: Matrix,
    /// Multiplier box: first `n` free, last `2n` nonnegative.
    pub dual_set: FeasibleSet,
}

pub fn lasso_reformulate(fhat: Arc<dyn ConvexObjective>, lambda: f64) -> Result<LassoReformulation> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must be finite and nonnegative, got {lambda}"),
        });
    }
    let n = fhat.dim();
    let mut a = Matrix::zeros(3 * n, 3 * n);
    for i in 0..n {
        a[(i, i)] = 1.0;
        a[(i, n + i)] = -1.0;
        a[(i, 2 * n + i)] = 1.0;
        a[(n + i, n + i)] = -1.0;
        a[(2 * n + i, 2 * n + i)] = -1.0;
    }
    let dual_set = FeasibleSet::unbounded(n).product(&FeasibleSet::orthant(2 * n));
    Ok(LassoReformulation {
        f: Arc::new(LassoSplitObjective { fhat, lambda }),
        a,
        dual_set,
    })
}

/// `L^P(u, v) = max_{y in Y} L^C(u, y) - rho/2 ||y - v||^2` for a function
/// `L^C` that is strongly concave in `y`, with `Y` taken from its domain.
#[derive(Clone)]
pub struct LassoDualProx<P> {
    lc: P,
    rho: f64,
    inner: InnerSolveConfig,
    y_set: FeasibleSet,
    warm: WarmStart,
}

pub fn lasso_dual_prox<P: SaddleProblem>(lc: P, rho: f64, inner: InnerSolveConfig) -> Result<LassoDualProx<P>> {
    check_positive("rho", rho)?;
    inner.validate()?;
    let (n, m) = lc.dims();
    let y_set = lc
        .domain()
        .map(|d| d.slice(n, m))
        .unwrap_or_else(|| FeasibleSet::unbounded(m));
    Ok(LassoDualProx {
        lc,
        rho,
        inner,
        y_set,
        warm: WarmStart::default(),
    })
}

impl<P: SaddleProblem> LassoDualProx<P> {
    pub fn base(&self) -> &P {
        &self.lc
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn y_set(&self) -> &FeasibleSet {
        &self.y_set
    }

    /// `y~(u, v)`, the constrained maximizer of the regularized function.
    pub fn y_tilde(&self, u: &Vector, v: &Vector) -> Result<Vector> {
        let (n, m) = self.lc.dims();
        check_dim("u", n, u.len())?;
        check_dim("v", m, v.len())?;
        let y0 = starting_point(&self.inner, &self.warm, &self.y_set.clamp(v));
        let rho = self.rho;
        let y = projected_newton_max(
            |y| {
                let d = y - v;
                let phi = self.lc.value(u, y)? - 0.5 * rho * d.norm_squared();
                let g = self.lc.gradient(u, y)?.y - &d * rho;
                let mut h = self.lc.hess_yy(u, y)?;
                for i in 0..m {
                    h[(i, i)] -= rho;
                }
                Ok((phi, g, h))
            },
            &self.y_set,
            y0,
            &self.inner,
        )?;
        if self.inner.warm_start {
            self.warm.set(&y);
        }
        Ok(y)
    }
}

impl<P: SaddleProblem> SaddleProblem for LassoDualProx<P> {
    fn dims(&self) -> (usize, usize) {
        self.lc.dims()
    }

    fn value(&self, u: &Vector, v: &Vector) -> Result<f64> {
        let y = self.y_tilde(u, v)?;
        Ok(self.lc.value(u, &y)? - 0.5 * self.rho * (&y - v).norm_squared())
    }

    fn gradient(&self, u: &Vector, v: &Vector) -> Result<Gradient> {
        let y = self.y_tilde(u, v)?;
        let gu = self.lc.gradient(u, &y)?.x;
        Ok(Gradient {
            x: gu,
            y: (&y - v) * self.rho,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::QuadraticObjective;
    use crate::saddle::FnSaddle;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn toy() -> FnSaddle {
        FnSaddle::new(
            1,
            1,
            |u, y| u[0] * y[0] - y[0] * y[0],
            |u, y| (v(&[y[0]]), v(&[u[0] - 2.0 * y[0]])),
        )
    }

    #[test]
    fn constraint_matrix_for_scalar() {
        let r = lasso_reformulate(Arc::new(QuadraticObjective::isotropic(1, 1.0)), 0.5).unwrap();
        let expect = Matrix::from_row_slice(3, 3, &[1.0, -1.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0]);
        assert_eq!(r.a, expect);
    }

    #[test]
    fn split_identity() {
        let r = lasso_reformulate(Arc::new(QuadraticObjective::isotropic(1, 1.0)), 2.0).unwrap();
        let x = v(&[-2.0, 0.0, 2.0]);
        assert_eq!((&r.a * &x)[0], 0.0);
        assert_eq!(r.f.value(&x), 0.5 * 4.0 + 2.0 * 2.0);
        let r0 = lasso_reformulate(Arc::new(QuadraticObjective::isotropic(1, 1.0)), 0.0).unwrap();
        assert_eq!(r0.f.value(&x), 2.0);
    }

    #[test]
    fn unconstrained_toy_maximizer() {
        let p = lasso_dual_prox(toy(), 1.5, InnerSolveConfig::default()).unwrap();
        let y = p.y_tilde(&v(&[0.8]), &v(&[-0.4])).unwrap();
        assert!((y[0] - (0.8 + 1.5 * -0.4) / 3.5).abs() < 1e-12);
    }

    #[test]
    fn constrained_toy_hits_bound() {
        let lc = toy().with_domain(FeasibleSet::unbounded(1).product(&FeasibleSet::orthant(1)));
        let p = lasso_dual_prox(lc, 1.0, InnerSolveConfig::default()).unwrap();
        assert_eq!(p.y_tilde(&v(&[-3.0]), &v(&[0.0])).unwrap(), v(&[0.0]));
    }

    #[test]
    fn negative_lambda_rejected() {
        assert!(lasso_reformulate(Arc::new(QuadraticObjective::isotropic(1, 1.0)), -1.0).is_err());
    }
}
