//! Inner solvers for the partial minimizers and maximizers that the
//! transforms need: damped Newton for unconstrained strongly convex problems
//! and a projected Newton method for box-constrained strongly concave ones.

use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::linalg::{solve_spd, Matrix, Vector};
use crate::projection::FeasibleSet;

/// Stopping rule and warm-start switch shared by all inner solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSolveConfig {
    /// Residual norm at which the solve stops.
    pub tol: f64,
    pub max_iters: usize,
    /// Start from the previous solution instead of the supplied guess.
    pub warm_start: bool,
}

impl Default for InnerSolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 100,
            warm_start: true,
        }
    }
}

impl InnerSolveConfig {
    pub fn validate(&self) -> Result<()> {
        crate::error::check_positive("inner tol", self.tol)?;
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "inner max_iters",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Last inner solution, reused as the next starting point.
///
/// Cloning copies the cached value into an independent cell, so each clone of
/// a transform warms up on its own trajectory.
#[derive(Debug, Default)]
pub struct WarmStart(Mutex<Option<Vector>>);

impl WarmStart {
    pub fn get(&self) -> Option<Vector> {
        self.0.lock().map(|g| g.clone()).unwrap_or(None)
    }

    pub fn set(&self, v: &Vector) {
        if let Ok(mut g) = self.0.lock() {
            *g = Some(v.clone());
        }
    }

    pub fn clear(&self) {
        if let Ok(mut g) = self.0.lock() {
            *g = None;
        }
    }
}

impl Clone for WarmStart {
    fn clone(&self) -> Self {
        WarmStart(Mutex::new(self.get()))
    }
}

/// Picks the starting point: the cached solution when warm starting is on and
/// its dimension fits, else the supplied guess.
/// Extra full steps taken after the tolerance is met, each kept only if it
/// lowers the residual.
const POLISH_STEPS: usize = 2;

pub(crate) fn starting_point(cfg: &InnerSolveConfig, warm: &WarmStart, guess: &Vector) -> Vector {
    if cfg.warm_start {
        if let Some(w) = warm.get() {
            if w.len() == guess.len() {
                return w;
            }
        }
    }
    guess.clone()
}

/// Solves `r(x) = 0` where `r` is the gradient of a strongly convex function
/// and `jac` its (positive definite) Hessian.
///
/// The Newton step is damped by backtracking on `||r||`; this is a descent
/// direction for the merit `||r||^2` whenever the Jacobian is nonsingular.
pub fn damped_newton<R, J>(residual: R, jac: J, x0: Vector, cfg: &InnerSolveConfig) -> Result<Vector>
where
    R: Fn(&Vector) -> Result<Vector>,
    J: Fn(&Vector) -> Result<Matrix>,
{
    let direction = |x: &Vector, r: &Vector| -> Result<Vector> {
        let h = jac(x)?;
        Ok(match solve_spd(&h, &(-r)) {
            Some(d) if d.iter().all(|v| v.is_finite()) => d,
            _ => -r,
        })
    };
    let mut x = x0;
    let mut r = residual(&x)?;
    let mut rn = r.norm();
    for _ in 0..cfg.max_iters {
        if rn <= cfg.tol {
            // full Newton steps are nearly free once converged
            for _ in 0..POLISH_STEPS {
                if rn == 0.0 {
                    break;
                }
                let trial = &x + direction(&x, &r)?;
                let rt = residual(&trial)?;
                let rtn = rt.norm();
                if rtn.is_nan() || rtn >= rn {
                    break;
                }
                x = trial;
                r = rt;
                rn = rtn;
            }
            return Ok(x);
        }
        let d = direction(&x, &r)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &x + &d * t;
            let rt = residual(&trial)?;
            let rtn = rt.norm();
            if rtn.is_finite() && rtn <= (1.0 - 1e-4 * t) * rn {
                x = trial;
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if rn <= cfg.tol {
        Ok(x)
    } else {
        Err(Error::InnerSolve {
            iterations: cfg.max_iters,
            residual: rn,
        })
    }
}

/// Natural residual `||y - P(y + g)||` of a box-constrained maximization.
pub fn natural_residual(set: &FeasibleSet, y: &Vector, g: &Vector) -> f64 {
    (y - set.clamp(&(y + g))).norm()
}

/// Maximizes a strongly concave `phi` over the box `set` by projected Newton.
///
/// `eval` returns `(phi(y), grad phi(y), hess phi(y))`. Coordinates that sit at
/// (or within a shrinking margin of) a bound with the gradient pointing
/// outward are held by a projected gradient step; the remaining free block
/// takes a Newton step. The combined step is projected and accepted by an
/// Armijo test along the projection arc.
pub fn projected_newton_max<E>(eval: E, set: &FeasibleSet, y0: Vector, cfg: &InnerSolveConfig) -> Result<Vector>
where
    E: Fn(&Vector) -> Result<(f64, Vector, Matrix)>,
{
    let dim = y0.len();
    let direction = |y: &Vector, g: &Vector, h: &Matrix, res: f64| -> Vector {
        let eps = res.min(1e-3);
        let lo = set.lower();
        let hi = set.upper();
        let held: Vec<bool> = (0..dim)
            .map(|j| (y[j] - lo[j] <= eps && g[j] < 0.0) || (hi[j] - y[j] <= eps && g[j] > 0.0))
            .collect();
        let free: Vec<usize> = (0..dim).filter(|&j| !held[j]).collect();
        let mut d = Vector::zeros(dim);
        for j in 0..dim {
            if held[j] {
                d[j] = g[j];
            }
        }
        if !free.is_empty() {
            let nf = free.len();
            let hff = Matrix::from_fn(nf, nf, |a, b| -h[(free[a], free[b])]);
            let gf = Vector::from_fn(nf, |a, _| g[free[a]]);
            let df = solve_spd(&hff, &gf).unwrap_or(gf);
            for (a, &j) in free.iter().enumerate() {
                d[j] = df[a];
            }
        }
        d
    };
    let mut y = set.clamp(&y0);
    let (mut phi, mut g, mut h) = eval(&y)?;
    let mut res = natural_residual(set, &y, &g);
    for _ in 0..cfg.max_iters {
        if res <= cfg.tol {
            for _ in 0..POLISH_STEPS {
                if res == 0.0 {
                    break;
                }
                let trial = set.clamp(&(&y + direction(&y, &g, &h, res)));
                let (_, gt, ht) = eval(&trial)?;
                let rt = natural_residual(set, &trial, &gt);
                if rt.is_nan() || rt >= res {
                    break;
                }
                y = trial;
                g = gt;
                h = ht;
                res = rt;
            }
            return Ok(y);
        }
        let d = direction(&y, &g, &h, res);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = set.clamp(&(&y + &d * t));
            let (pt, gt, ht) = eval(&trial)?;
            // value gains near the optimum drop below rounding; a halved
            // natural residual is accepted on its own
            let armijo = pt.is_finite() && pt >= phi + 1e-4 * g.dot(&(&trial - &y));
            if armijo || natural_residual(set, &trial, &gt) <= 0.5 * res {
                let moved = (&trial - &y).norm();
                y = trial;
                phi = pt;
                g = gt;
                h = ht;
                accepted = moved > 0.0;
                break;
            }
            t *= 0.5;
        }
        res = natural_residual(set, &y, &g);
        if !accepted && res > cfg.tol {
            // Newton direction failed; fall back to a projected gradient step
            // with step size from the curvature bound.
            let curv = crate::linalg::sym_eig_extremes(&(-&h)).1.max(1e-12);
            let trial = set.clamp(&(&y + &g / curv));
            let (pt, gt, ht) = eval(&trial)?;
            if pt < phi {
                break;
            }
            y = trial;
            phi = pt;
            g = gt;
            h = ht;
            res = natural_residual(set, &y, &g);
        }
    }
    if res <= cfg.tol {
        Ok(y)
    } else {
        Err(Error::InnerSolve {
            iterations: cfg.max_iters,
            residual: res,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn newton_solves_scalar_cubic() {
        // x^3 + x - 1 = 0, the proximal step of x^4 / 4 at u = 1 with rho = 1
        let cfg = InnerSolveConfig::default();
        let x = damped_newton(
            |x| Ok(v(&[x[0].powi(3) + x[0] - 1.0])),
            |x| Ok(Matrix::from_element(1, 1, 3.0 * x[0] * x[0] + 1.0)),
            v(&[1.0]),
            &cfg,
        )
        .unwrap();
        assert!((x[0] - 0.6823278038280193).abs() < 1e-12);
    }

    #[test]
    fn newton_reports_failure_with_residual() {
        let cfg = InnerSolveConfig {
            max_iters: 1,
            ..Default::default()
        };
        let err = damped_newton(
            |x| Ok(v(&[x[0].powi(3) + x[0] - 1.0])),
            |x| Ok(Matrix::from_element(1, 1, 3.0 * x[0] * x[0] + 1.0)),
            v(&[10.0]),
            &cfg,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InnerSolve { residual, .. } if residual > 0.0));
    }

    #[test]
    fn projected_newton_hits_active_bound() {
        // maximize -(y - c)^2 over y >= 0 with c = (-1, 2)
        let set = FeasibleSet::orthant(2);
        let c = v(&[-1.0, 2.0]);
        let y = projected_newton_max(
            |y| {
                let d = y - &c;
                Ok((-d.norm_squared(), -2.0 * &d, Matrix::identity(2, 2) * -2.0))
            },
            &set,
            v(&[3.0, 3.0]),
            &InnerSolveConfig::default(),
        )
        .unwrap();
        assert_eq!(y, v(&[0.0, 2.0]));
    }

    #[test]
    fn warm_start_clone_is_independent() {
        let w = WarmStart::default();
        w.set(&v(&[1.0]));
        let c = w.clone();
        w.set(&v(&[2.0]));
        assert_eq!(c.get(), Some(v(&[1.0])));
    }
}
