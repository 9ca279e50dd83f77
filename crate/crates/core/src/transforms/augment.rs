//! State augmentation with virtual copies `(x_hat, y_hat)`:
//!
//! `S_hat(x, x_hat, y, y_hat) = rho/2 ||x - x_hat||^2 + S(x, y) - rho/2 ||y - y_hat||^2`
//!
//! The minimizing block is `(x, x_hat)` and the maximizing block `(y, y_hat)`.

use crate::error::{check_dim, check_positive, Result};
use crate::linalg::{block_diag, split, stack, Matrix, Vector};
use crate::projection::FeasibleSet;
use crate::saddle::{Gradient, PointZ, SaddleProblem};

#[derive(Debug, Clone)]
pub struct AugmentedProblem<P> {
    base: P,
    rho: f64,
}

/// Wraps `problem` in the augmented function with coupling weight `rho`.
pub fn augment<P: SaddleProblem>(problem: P, rho: f64) -> Result<AugmentedProblem<P>> {
    check_positive("rho", rho)?;
    Ok(AugmentedProblem { base: problem, rho })
}

impl<P: SaddleProblem> AugmentedProblem<P> {
    pub fn base(&self) -> &P {
        &self.base
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Lifts `(x, y)` to the diagonal state `(x, x, y, y)`.
    pub fn lift(&self, z: &PointZ) -> PointZ {
        PointZ::new(stack(&z.x, &z.x), stack(&z.y, &z.y))
    }

    /// Projects an augmented point to its `(x, y)` part.
    pub fn original(&self, z: &PointZ) -> PointZ {
        let (n, m) = self.base.dims();
        PointZ::new(z.x.rows(0, n).into_owned(), z.y.rows(0, m).into_owned())
    }
}

impl<P: SaddleProblem> SaddleProblem for AugmentedProblem<P> {
    fn dims(&self) -> (usize, usize) {
        let (n, m) = self.base.dims();
        (2 * n, 2 * m)
    }

    fn value(&self, xx: &Vector, yy: &Vector) -> Result<f64> {
        let (n, m) = self.base.dims();
        check_dim("x", 2 * n, xx.len())?;
        check_dim("y", 2 * m, yy.len())?;
        let (x, xh) = split(xx, n);
        let (y, yh) = split(yy, m);
        Ok(0.5 * self.rho * (&x - &xh).norm_squared() + self.base.value(&x, &y)?
            - 0.5 * self.rho * (&y - &yh).norm_squared())
    }

    fn gradient(&self, xx: &Vector, yy: &Vector) -> Result<Gradient> {
        let (n, m) = self.base.dims();
        check_dim("x", 2 * n, xx.len())?;
        check_dim("y", 2 * m, yy.len())?;
        let (x, xh) = split(xx, n);
        let (y, yh) = split(yy, m);
        let g = self.base.gradient(&x, &y)?;
        let dx = (&x - &xh) * self.rho;
        let dy = (&y - &yh) * self.rho;
        Ok(Gradient {
            x: stack(&(&g.x + &dx), &-&dx),
            y: stack(&(&g.y - &dy), &dy),
        })
    }

    /// The base domain on `(x, y)`; the copies `x_hat`, `y_hat` are free.
    fn domain(&self) -> Option<FeasibleSet> {
        let (n, m) = self.base.dims();
        self.base.domain().map(|d| {
            d.slice(0, n)
                .product(&FeasibleSet::unbounded(n))
                .product(&d.slice(n, m))
                .product(&FeasibleSet::unbounded(m))
        })
    }

    fn known_saddle(&self) -> Option<PointZ> {
        self.base.known_saddle().map(|z| self.lift(&z))
    }

    fn hess_xx(&self, xx: &Vector, yy: &Vector) -> Result<Matrix> {
        let (n, m) = self.base.dims();
        let hb = self.base.hess_xx(&xx.rows(0, n).into_owned(), &yy.rows(0, m).into_owned())?;
        let mut h = block_diag(&hb, &Matrix::zeros(n, n));
        for i in 0..n {
            h[(i, i)] += self.rho;
            h[(n + i, n + i)] += self.rho;
            h[(i, n + i)] -= self.rho;
            h[(n + i, i)] -= self.rho;
        }
        Ok(h)
    }

    fn hess_yy(&self, xx: &Vector, yy: &Vector) -> Result<Matrix> {
        let (n, m) = self.base.dims();
        let hb = self.base.hess_yy(&xx.rows(0, n).into_owned(), &yy.rows(0, m).into_owned())?;
        let mut h = block_diag(&hb, &Matrix::zeros(m, m));
        for i in 0..m {
            h[(i, i)] -= self.rho;
            h[(m + i, m + i)] -= self.rho;
            h[(i, m + i)] += self.rho;
            h[(m + i, i)] += self.rho;
        }
        Ok(h)
    }
}
