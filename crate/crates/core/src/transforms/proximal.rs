//! Proximal surrogate `S~(u, y) = min_x S(x, y) + rho/2 ||x - u||^2`.
//!
//! With `x~(u, y)` the inner minimizer, the gradients are
//! `grad_u S~ = rho (u - x~)` and `grad_y S~ = grad_y S(x~, y)`.

use crate::error::{check_dim, check_positive, Result};
use crate::linalg::{Matrix, Vector};
use crate::projection::FeasibleSet;
use crate::saddle::{Gradient, PointZ, SaddleProblem};
use crate::transforms::inner::{damped_newton, starting_point, InnerSolveConfig, WarmStart};

#[derive(Debug, Clone)]
pub struct ProximalSurrogate<P> {
    base: P,
    rho: f64,
    inner: InnerSolveConfig,
    warm: WarmStart,
}

pub fn proximal_surrogate<P: SaddleProblem>(
    problem: P,
    rho: f64,
    inner: InnerSolveConfig,
) -> Result<ProximalSurrogate<P>> {
    check_positive("rho", rho)?;
    inner.validate()?;
    Ok(ProximalSurrogate {
        base: problem,
        rho,
        inner,
        warm: WarmStart::default(),
    })
}

impl<P: SaddleProblem> ProximalSurrogate<P> {
    pub fn base(&self) -> &P {
        &self.base
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn inner_config(&self) -> &InnerSolveConfig {
        &self.inner
    }

    /// Solves `grad_x S(x, y) + rho (x - u) = 0` starting from `x0`.
    pub fn inner_minimizer(&self, u: &Vector, y: &Vector, x0: &Vector) -> Result<Vector> {
        let (n, m) = self.base.dims();
        check_dim("u", n, u.len())?;
        check_dim("y", m, y.len())?;
        check_dim("x0", n, x0.len())?;
        let rho = self.rho;
        damped_newton(
            |x| Ok(self.base.gradient(x, y)?.x + (x - u) * rho),
            |x| {
                let mut h = self.base.hess_xx(x, y)?;
                for i in 0..n {
                    h[(i, i)] += rho;
                }
                Ok(h)
            },
            x0.clone(),
            &self.inner,
        )
    }

    /// `x~(u, y)`, warm-started from the previous evaluation when enabled.
    pub fn x_tilde(&self, u: &Vector, y: &Vector) -> Result<Vector> {
        let x0 = starting_point(&self.inner, &self.warm, u);
        let x = self.inner_minimizer(u, y, &x0)?;
        if self.inner.warm_start {
            self.warm.set(&x);
        }
        Ok(x)
    }
}

impl<P: SaddleProblem> SaddleProblem for ProximalSurrogate<P> {
    fn dims(&self) -> (usize, usize) {
        self.base.dims()
    }

    fn value(&self, u: &Vector, y: &Vector) -> Result<f64> {
        let x = self.x_tilde(u, y)?;
        Ok(self.base.value(&x, y)? + 0.5 * self.rho * (&x - u).norm_squared())
    }

    fn gradient(&self, u: &Vector, y: &Vector) -> Result<Gradient> {
        let x = self.x_tilde(u, y)?;
        let gy = self.base.gradient(&x, y)?.y;
        Ok(Gradient {
            x: (u - &x) * self.rho,
            y: gy,
        })
    }

    /// Constraints of the base on `y` carry over; `u` is free.
    fn domain(&self) -> Option<FeasibleSet> {
        let (n, m) = self.base.dims();
        self.base
            .domain()
            .map(|d| FeasibleSet::unbounded(n).product(&d.slice(n, m)))
    }

    fn known_saddle(&self) -> Option<PointZ> {
        self.base.known_saddle()
    }

    fn hess_xx(&self, u: &Vector, y: &Vector) -> Result<Matrix> {
        // d/du [rho (u - x~)] = rho I - rho dx~/du, dx~/du = rho (H + rho I)^-1
        let (n, _) = self.base.dims();
        let x = self.x_tilde(u, y)?;
        let mut hr = self.base.hess_xx(&x, y)?;
        for i in 0..n {
            hr[(i, i)] += self.rho;
        }
        let inv = hr.try_inverse().unwrap_or_else(|| Matrix::identity(n, n) / self.rho);
        Ok(Matrix::identity(n, n) * self.rho - inv * (self.rho * self.rho))
    }
}
