//! Bilinear and quadratic saddle functions with exact metadata.

use crate::error::{check_dim, check_positive, Error, Result};
use crate::linalg::{sym_eig_extremes, Matrix, Vector};
use crate::saddle::{ConvexityMeta, Gradient, PointZ, SaddleProblem};

/// `S(x, y) = x'My`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bilinear {
    m: Matrix,
}

pub fn make_bilinear(m: Matrix) -> Bilinear {
    Bilinear { m }
}

impl SaddleProblem for Bilinear {
    fn dims(&self) -> (usize, usize) {
        self.m.shape()
    }

    fn value(&self, x: &Vector, y: &Vector) -> Result<f64> {
        check_dim("x", self.m.nrows(), x.len())?;
        check_dim("y", self.m.ncols(), y.len())?;
        Ok(x.dot(&(&self.m * y)))
    }

    fn gradient(&self, x: &Vector, y: &Vector) -> Result<Gradient> {
        check_dim("x", self.m.nrows(), x.len())?;
        check_dim("y", self.m.ncols(), y.len())?;
        Ok(Gradient {
            x: &self.m * y,
            y: self.m.transpose() * x,
        })
    }

    fn meta(&self) -> ConvexityMeta {
        let (kappa, sigma) = sym_eig_extremes(&(self.m.transpose() * &self.m));
        ConvexityMeta {
            mu: Some(0.0),
            q: Some(0.0),
            l: Some(0.0),
            kappa: Some(kappa.max(0.0)),
            sigma: Some(sigma.max(0.0)),
        }
    }

    fn known_saddle(&self) -> Option<PointZ> {
        let (n, m) = self.m.shape();
        Some(PointZ::new(Vector::zeros(n), Vector::zeros(m)))
    }

    fn hess_xx(&self, _x: &Vector, _y: &Vector) -> Result<Matrix> {
        let n = self.m.nrows();
        Ok(Matrix::zeros(n, n))
    }

    fn hess_yy(&self, _x: &Vector, _y: &Vector) -> Result<Matrix> {
        let m = self.m.ncols();
        Ok(Matrix::zeros(m, m))
    }
}

/// `S(x, y) = 1/2 x'Q_x x + y'Kx - 1/2 y'Q_y y`, saddle at the origin.
///
/// Metadata: `mu, l` are the extreme eigenvalues of `Q_x`, `q` the smallest of
/// `Q_y`, and `kappa, sigma` the extreme eigenvalues of `KK'`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSaddle {
    qx: Matrix,
    k: Matrix,
    qy: Matrix,
    meta: ConvexityMeta,
}

impl QuadraticSaddle {
    pub fn new(qx: Matrix, k: Matrix, qy: Matrix) -> Result<Self> {
        let (m, n) = k.shape();
        check_dim("Q_x rows", n, qx.nrows())?;
        check_dim("Q_x columns", n, qx.ncols())?;
        check_dim("Q_y rows", m, qy.nrows())?;
        check_dim("Q_y columns", m, qy.ncols())?;
        let (mu, l) = sym_eig_extremes(&qx);
        let (q, _) = sym_eig_extremes(&qy);
        if mu < -1e-12 || q < -1e-12 {
            return Err(Error::InvalidParameter {
                name: "quadratic saddle",
                reason: format!("not convex-concave (eigenvalues {mu}, {q})"),
            });
        }
        let (kappa, sigma) = sym_eig_extremes(&(&k * k.transpose()));
        let meta = ConvexityMeta {
            mu: Some(mu.max(0.0)),
            q: Some(q.max(0.0)),
            l: Some(l.max(0.0)),
            kappa: Some(kappa.max(0.0)),
            sigma: Some(sigma.max(0.0)),
        };
        Ok(Self {
            qx: (&qx + qx.transpose()) * 0.5,
            k,
            qy: (&qy + qy.transpose()) * 0.5,
            meta,
        })
    }

    pub fn cross(&self) -> &Matrix {
        &self.k
    }
}

/// `S = mu/2 ||x||^2 + x'By - q/2 ||y||^2` with `B` of size `n x m`.
pub fn make_quadratic_saddle(mu: f64, q: f64, b: Matrix) -> Result<QuadraticSaddle> {
    check_positive("mu", mu)?;
    check_positive("q", q)?;
    let (n, m) = b.shape();
    QuadraticSaddle::new(
        Matrix::identity(n, n) * mu,
        b.transpose(),
        Matrix::identity(m, m) * q,
    )
}

impl SaddleProblem for QuadraticSaddle {
    fn dims(&self) -> (usize, usize) {
        (self.k.ncols(), self.k.nrows())
    }

    fn value(&self, x: &Vector, y: &Vector) -> Result<f64> {
        let (n, m) = self.dims();
        check_dim("x", n, x.len())?;
        check_dim("y", m, y.len())?;
        Ok(0.5 * x.dot(&(&self.qx * x)) + y.dot(&(&self.k * x)) - 0.5 * y.dot(&(&self.qy * y)))
    }

    fn gradient(&self, x: &Vector, y: &Vector) -> Result<Gradient> {
        let (n, m) = self.dims();
        check_dim("x", n, x.len())?;
        check_dim("y", m, y.len())?;
        Ok(Gradient {
            x: &self.qx * x + self.k.transpose() * y,
            y: &self.k * x - &self.qy * y,
        })
    }

    fn meta(&self) -> ConvexityMeta {
        self.meta
    }

    fn known_saddle(&self) -> Option<PointZ> {
        let (n, m) = self.dims();
        Some(PointZ::new(Vector::zeros(n), Vector::zeros(m)))
    }

    fn hess_xx(&self, _x: &Vector, _y: &Vector) -> Result<Matrix> {
        Ok(self.qx.clone())
    }

    fn hess_yy(&self, _x: &Vector, _y: &Vector) -> Result<Matrix> {
        Ok(-&self.qy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saddle::grad;

    #[test]
    fn bilinear_gradient() {
        let p = make_bilinear(Matrix::from_element(1, 1, 1.0));
        let g = grad(&p, &PointZ::from_slices(&[1.0], &[2.0])).unwrap();
        assert_eq!((g.x[0], g.y[0]), (2.0, 1.0));
    }

    #[test]
    fn quadratic_meta_is_exact() {
        let p = make_quadratic_saddle(1.0, 2.0, Matrix::zeros(2, 2)).unwrap();
        let meta = p.meta();
        assert_eq!((meta.mu, meta.q, meta.l), (Some(1.0), Some(2.0), Some(1.0)));
    }

    #[test]
    fn indefinite_block_rejected() {
        let qx = Matrix::from_row_slice(1, 1, &[-1.0]);
        assert!(QuadraticSaddle::new(qx, Matrix::zeros(1, 1), Matrix::identity(1, 1)).is_err());
    }
}
