//! Lasso regression `min 1/2 ||A x - b||^2 + lambda ||x||_1`, its solution by
//! the preconditioned, dual-regularized saddle flow, and a proximal-gradient
//! reference solver.

use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::flows::{lasso_flow, Flow};
use crate::linalg::{stack, Matrix, Vector};
use crate::objective::{ConvexObjective, LeastSquares};
use crate::transforms::{
    lasso_dual_prox, lasso_reformulate, precondition, InnerSolveConfig, LassoDualProx, LassoReformulation,
    Preconditioned,
};

#[derive(Clone)]
pub struct LassoProblem {
    pub fhat: Arc<LeastSquares>,
    pub lambda: f64,
    pub reform: LassoReformulation,
}

pub fn make_lasso(a_data: Matrix, b_data: Vector, lambda: f64) -> Result<LassoProblem> {
    let fhat = Arc::new(LeastSquares::new(a_data, b_data)?);
    let reform = lasso_reformulate(fhat.clone(), lambda)?;
    Ok(LassoProblem { fhat, lambda, reform })
}

impl LassoProblem {
    pub fn n(&self) -> usize {
        self.fhat.dim()
    }

    /// `l = lambda_max(A'A)`.
    pub fn l(&self) -> f64 {
        self.fhat.l().unwrap_or(0.0)
    }

    /// `1/2 ||Ax - b||^2 + lambda ||x||_1`.
    pub fn objective(&self, x: &Vector) -> f64 {
        self.fhat.value(x) + self.lambda * x.lp_norm(1)
    }

    /// Infinity norm of the minimal subgradient at `x`.
    pub fn optimality_residual(&self, x: &Vector) -> f64 {
        let g = self.fhat.gradient(x);
        let lam = self.lambda;
        x.iter()
            .zip(g.iter())
            .map(|(xi, gi)| {
                if *xi > 0.0 {
                    (gi + lam).abs()
                } else if *xi < 0.0 {
                    (gi - lam).abs()
                } else {
                    (gi.abs() - lam).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    /// `L^C(u, y)`: the preconditioned split Lagrangian with `eta = 1`.
    pub fn preconditioned(&self, alpha: f64) -> Result<Preconditioned> {
        let l = self.l();
        if !(alpha > 0.0 && alpha * l < 2.0) {
            return Err(Error::ConditionViolated(format!(
                "alpha < 2 / l fails: alpha = {alpha}, l = {l}"
            )));
        }
        precondition(
            self.reform.f.clone(),
            self.reform.a.clone(),
            Vector::zeros(3 * self.n()),
            1.0,
            alpha,
        )?
        .with_dual_set(self.reform.dual_set.clone())
    }

    /// `L^P(u, v)`: the dual proximal regularization of `L^C`.
    pub fn dual_prox(&self, alpha: f64, rho: f64, inner: InnerSolveConfig) -> Result<LassoDualProx<Preconditioned>> {
        lasso_dual_prox(self.preconditioned(alpha)?, rho, inner)
    }

    pub fn pipeline(&self, alpha: f64, rho: f64, inner: InnerSolveConfig) -> Result<LassoPipeline> {
        let flow = lasso_flow(self.dual_prox(alpha, rho, inner)?);
        Ok(LassoPipeline {
            flow,
            alpha,
            a: self.reform.a.clone(),
            n: self.n(),
        })
    }

    /// Split primal-dual pair `(x*, y*)` from a Lasso solution `x_hat*`.
    pub fn kkt_from_primal(&self, x_hat: &Vector) -> Result<(Vector, Vector)> {
        let n = self.n();
        check_dim("x_hat", n, x_hat.len())?;
        let y_hat = -self.fhat.gradient(x_hat);
        let plus = x_hat.map(|v| v.max(0.0));
        let minus = x_hat.map(|v| (-v).max(0.0));
        let x = stack(&stack(x_hat, &plus), &minus);
        let y_plus = y_hat.map(|v| self.lambda - v);
        let y_minus = y_hat.map(|v| self.lambda + v);
        let y = stack(&stack(&y_hat, &y_plus), &y_minus);
        Ok((x, y))
    }
}

/// The Lasso flow over `(u, v)` and its recovery map.
#[derive(Debug, Clone)]
pub struct LassoPipeline {
    pub flow: Flow,
    pub alpha: f64,
    a: Matrix,
    n: usize,
}

impl LassoPipeline {
    /// `(x, y) = (u - alpha A'v, v)`.
    pub fn recover(&self, state: &Vector) -> (Vector, Vector) {
        let d = 3 * self.n;
        let u = state.rows(0, d).into_owned();
        let v = state.rows(d, d).into_owned();
        (&u - self.a.transpose() * &v * self.alpha, v)
    }

    /// The Lasso coefficients `x_hat` of the recovered primal point.
    pub fn x_hat(&self, state: &Vector) -> Vector {
        self.recover(state).0.rows(0, self.n).into_owned()
    }

    /// Equilibrium `(u*, v*) = (x* + alpha A'y*, y*)` for a split KKT pair.
    pub fn equilibrium(&self, x: &Vector, y: &Vector) -> Vector {
        stack(&(x + self.a.transpose() * y * self.alpha), y)
    }
}

/// Proximal-gradient (soft-thresholding) reference solver, run until the
/// minimal subgradient has infinity norm at most `tol`.
pub fn lasso_oracle(problem: &LassoProblem, tol: f64, max_iters: usize, x0: Option<&Vector>) -> Result<Vector> {
    let n = problem.n();
    let mut x = match x0 {
        Some(x0) => {
            check_dim("x0", n, x0.len())?;
            x0.clone()
        }
        None => Vector::zeros(n),
    };
    let l = problem.l();
    if l <= 0.0 {
        // A = 0: the objective is lambda ||x||_1 (+ const), minimized at 0
        return Ok(Vector::zeros(n));
    }
    let step = 1.0 / l;
    let thresh = problem.lambda * step;
    let mut res = problem.optimality_residual(&x);
    for _ in 0..max_iters {
        if res <= tol {
            return Ok(x);
        }
        let z = &x - problem.fhat.gradient(&x) * step;
        x = z.map(|v| v.signum() * (v.abs() - thresh).max(0.0));
        res = problem.optimality_residual(&x);
    }
    if res <= tol {
        Ok(x)
    } else {
        Err(Error::IterationCap {
            iterations: max_iters,
            residual: res,
        })
    }
}
