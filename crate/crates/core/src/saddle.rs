//! The saddle-problem abstraction and the predicates built on it.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{fd_jacobian, split, stack, Matrix, Vector};
use crate::projection::FeasibleSet;

/// Partial gradients `(grad_x S, grad_y S)` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub x: Vector,
    pub y: Vector,
}

/// Known curvature constants of a problem. Any entry may be absent.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConvexityMeta {
    /// Strong convexity modulus in `x`.
    pub mu: Option<f64>,
    /// Strong concavity modulus in `y`.
    pub q: Option<f64>,
    /// Lipschitz constant of `grad_x` in `x`.
    pub l: Option<f64>,
    /// Lower eigenvalue bound of the cross-term Gram matrix.
    pub kappa: Option<f64>,
    /// Upper eigenvalue bound of the cross-term Gram matrix.
    pub sigma: Option<f64>,
}

impl ConvexityMeta {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("mu", self.mu),
            ("q", self.q),
            ("l", self.l),
            ("kappa", self.kappa),
            ("sigma", self.sigma),
        ];
        for (name, v) in named {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InconsistentMeta(format!("{name} = {v} is not a finite nonnegative number")));
                }
            }
        }
        if let (Some(mu), Some(l)) = (self.mu, self.l) {
            if mu > l {
                return Err(Error::InconsistentMeta(format!("mu = {mu} exceeds l = {l}")));
            }
        }
        if let (Some(k), Some(s)) = (self.kappa, self.sigma) {
            if k > s {
                return Err(Error::InconsistentMeta(format!("kappa = {k} exceeds sigma = {s}")));
            }
        }
        Ok(())
    }

    pub fn require_mu(&self) -> Result<f64> {
        self.mu.ok_or(Error::MissingConstant("mu"))
    }

    pub fn require_q(&self) -> Result<f64> {
        self.q.ok_or(Error::MissingConstant("q"))
    }

    pub fn require_l(&self) -> Result<f64> {
        self.l.ok_or(Error::MissingConstant("l"))
    }

    pub fn require_kappa(&self) -> Result<f64> {
        self.kappa.ok_or(Error::MissingConstant("kappa"))
    }

    pub fn require_sigma(&self) -> Result<f64> {
        self.sigma.ok_or(Error::MissingConstant("sigma"))
    }
}

/// A point `z = (x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointZ {
    pub x: Vector,
    pub y: Vector,
}

impl PointZ {
    pub fn new(x: Vector, y: Vector) -> Self {
        Self { x, y }
    }

    pub fn from_slices(x: &[f64], y: &[f64]) -> Self {
        Self::new(Vector::from_row_slice(x), Vector::from_row_slice(y))
    }

    /// Splits a stacked state whose first `n` entries are `x`.
    pub fn from_stacked(z: &Vector, n: usize) -> Self {
        let (x, y) = split(z, n);
        Self { x, y }
    }

    pub fn stacked(&self) -> Vector {
        stack(&self.x, &self.y)
    }
}

/// A convex-concave function `S(x, y)` with analytic partial gradients.
///
/// Implementations are immutable after construction (interior caches aside)
/// and may be shared across threads.
pub trait SaddleProblem: Send + Sync {
    /// `(n, m)`: dimensions of the minimizing and maximizing blocks.
    fn dims(&self) -> (usize, usize);

    fn value(&self, x: &Vector, y: &Vector) -> Result<f64>;

    fn gradient(&self, x: &Vector, y: &Vector) -> Result<Gradient>;

    fn meta(&self) -> ConvexityMeta {
        ConvexityMeta::default()
    }

    /// Box constraints on the stacked `(x, y)`, if the problem has any.
    fn domain(&self) -> Option<FeasibleSet> {
        None
    }

    /// The saddle point, when the builder knows it in closed form.
    fn known_saddle(&self) -> Option<PointZ> {
        None
    }

    /// `d^2 S / dx^2`; central differences of `grad_x` unless overridden.
    fn hess_xx(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        let n = x.len();
        let jac = fd_jacobian(|xp| Ok(self.gradient(xp, y)?.x), x, n)?;
        Ok((&jac + jac.transpose()) * 0.5)
    }

    /// `d^2 S / dy^2`; central differences of `grad_y` unless overridden.
    fn hess_yy(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        let m = y.len();
        let jac = fd_jacobian(|yp| Ok(self.gradient(x, yp)?.y), y, m)?;
        Ok((&jac + jac.transpose()) * 0.5)
    }
}

impl<T: SaddleProblem + ?Sized> SaddleProblem for Arc<T> {
    fn dims(&self) -> (usize, usize) {
        (**self).dims()
    }
    fn value(&self, x: &Vector, y: &Vector) -> Result<f64> {
        (**self).value(x, y)
    }
    fn gradient(&self, x: &Vector, y: &Vector) -> Result<Gradient> {
        (**self).gradient(x, y)
    }
    fn meta(&self) -> ConvexityMeta {
        (**self).meta()
    }
    fn domain(&self) -> Option<FeasibleSet> {
        (**self).domain()
    }
    fn known_saddle(&self) -> Option<PointZ> {
        (**self).known_saddle()
    }
    fn hess_xx(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        (**self).hess_xx(x, y)
    }
    fn hess_yy(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        (**self).hess_yy(x, y)
    }
}

type ValueFn = dyn Fn(&Vector, &Vector) -> f64 + Send + Sync;
type GradFn = dyn Fn(&Vector, &Vector) -> (Vector, Vector) + Send + Sync;

/// A problem assembled from closures, for ad-hoc functions and tests.
#[derive(Clone)]
pub struct FnSaddle {
    n: usize,
    m: usize,
    value: Arc<ValueFn>,
    grad: Arc<GradFn>,
    meta: ConvexityMeta,
    domain: Option<FeasibleSet>,
    saddle: Option<PointZ>,
}

impl FnSaddle {
    pub fn new<V, G>(n: usize, m: usize, value: V, grad: G) -> Self
    where
        V: Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
        G: Fn(&Vector, &Vector) -> (Vector, Vector) + Send + Sync + 'static,
    {
        Self {
            n,
            m,
            value: Arc::new(value),
            grad: Arc::new(grad),
            meta: ConvexityMeta::default(),
            domain: None,
            saddle: None,
        }
    }

    pub fn with_meta(mut self, meta: ConvexityMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn with_domain(mut self, domain: FeasibleSet) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn with_saddle(mut self, saddle: PointZ) -> Self {
        self.saddle = Some(saddle);
        self
    }
}

impl SaddleProblem for FnSaddle {
    fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    fn value(&self, x: &Vector, y: &Vector) -> Result<f64> {
        check_dim("x", self.n, x.len())?;
        check_dim("y", self.m, y.len())?;
        Ok((self.value)(x, y))
    }

    fn gradient(&self, x: &Vector, y: &Vector) -> Result<Gradient> {
        check_dim("x", self.n, x.len())?;
        check_dim("y", self.m, y.len())?;
        let (gx, gy) = (self.grad)(x, y);
        Ok(Gradient { x: gx, y: gy })
    }

    fn meta(&self) -> ConvexityMeta {
        self.meta
    }

    fn domain(&self) -> Option<FeasibleSet> {
        self.domain.clone()
    }

    fn known_saddle(&self) -> Option<PointZ> {
        self.saddle.clone()
    }
}

/// Both partial gradients at `z`, after checking block dimensions.
pub fn grad<P: SaddleProblem + ?Sized>(problem: &P, z: &PointZ) -> Result<Gradient> {
    let (n, m) = problem.dims();
    check_dim("x", n, z.x.len())?;
    check_dim("y", m, z.y.len())?;
    problem.gradient(&z.x, &z.y)
}

/// Norm of the (projected when `set` is given) saddle flow field at `z`.
pub fn stationarity_residual<P: SaddleProblem + ?Sized>(
    problem: &P,
    z: &PointZ,
    set: Option<&FeasibleSet>,
) -> Result<f64> {
    let mut z = z.clone();
    if let Some(set) = set {
        let (n, m) = problem.dims();
        check_dim("feasible set", n + m, set.dim())?;
        z = PointZ::from_stacked(&set.snap(&z.stacked())?, n);
    }
    let g = grad(problem, &z)?;
    let field = stack(&-g.x, &g.y);
    let field = match set {
        Some(set) => set.project_vector_field(&z.stacked(), &field)?,
        None => field,
    };
    Ok(field.norm())
}

/// A sample at which one of the saddle inequalities fails.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleViolation {
    pub sample: usize,
    pub point: PointZ,
    /// `S(x*, y) - S(x*, y*)`, positive when the `y` inequality fails.
    pub y_gap: f64,
    /// `S(x*, y*) - S(x, y*)`, positive when the `x` inequality fails.
    pub x_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleCheck {
    pub passed: bool,
    pub first_violation: Option<SaddleViolation>,
}

/// Tests `S(x*, y) <= S(x*, y*) <= S(x, y*)` within `tol` on `samples` seeded
/// points drawn uniformly from the ball of radius `radius` about `z_star`.
///
/// When `set` is given, samples are projected onto it; since `z_star` lies in
/// the set and projection is nonexpansive, projected samples stay in the ball.
pub fn saddle_inequality_check<P: SaddleProblem + ?Sized>(
    problem: &P,
    z_star: &PointZ,
    samples: usize,
    radius: f64,
    tol: f64,
    seed: u64,
    set: Option<&FeasibleSet>,
) -> Result<SaddleCheck> {
    if samples == 0 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "must be at least 1".into(),
        });
    }
    crate::error::check_positive("radius", radius)?;
    let (n, m) = problem.dims();
    check_dim("x", n, z_star.x.len())?;
    check_dim("y", m, z_star.y.len())?;
    let center = z_star.stacked();
    let s_star = problem.value(&z_star.x, &z_star.y)?;
    let d = n + m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..samples {
        let dir = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = dir.norm();
        let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
        let mut p = if norm > 0.0 { &center + dir * (r / norm) } else { center.clone() };
        if let Some(set) = set {
            p = set.project_point(&p)?;
        }
        let pt = PointZ::from_stacked(&p, n);
        let y_gap = problem.value(&z_star.x, &pt.y)? - s_star;
        let x_gap = s_star - problem.value(&pt.x, &z_star.y)?;
        if y_gap > tol || x_gap > tol {
            return Ok(SaddleCheck {
                passed: false,
                first_violation: Some(SaddleViolation {
                    sample: k,
                    point: pt,
                    y_gap,
                    x_gap,
                }),
            });
        }
    }
    Ok(SaddleCheck {
        passed: true,
        first_violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn xy() -> FnSaddle {
        FnSaddle::new(1, 1, |x, y| x[0] * y[0], |x, y| (v(&[y[0]]), v(&[x[0]])))
    }

    fn quad() -> FnSaddle {
        FnSaddle::new(
            1,
            1,
            |x, y| 0.5 * x[0] * x[0] - 0.5 * y[0] * y[0],
            |x, y| (v(&[x[0]]), v(&[-y[0]])),
        )
    }

    #[test]
    fn grad_examples() {
        let g = grad(&xy(), &PointZ::from_slices(&[1.0], &[2.0])).unwrap();
        assert_eq!((g.x[0], g.y[0]), (2.0, 1.0));
        let g = grad(&quad(), &PointZ::from_slices(&[3.0], &[-4.0])).unwrap();
        assert_eq!((g.x[0], g.y[0]), (3.0, 4.0));
    }

    #[test]
    fn grad_rejects_wrong_block() {
        let err = grad(&xy(), &PointZ::from_slices(&[1.0, 2.0], &[2.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { block: "x", .. }));
    }

    #[test]
    fn residual_examples() {
        let p = FnSaddle::new(
            1,
            1,
            |x, y| 0.5 * x[0] * x[0] - 0.5 * y[0] * y[0] + x[0] * y[0],
            |x, y| (v(&[x[0] + y[0]]), v(&[-y[0] + x[0]])),
        );
        let r = stationarity_residual(&p, &PointZ::from_slices(&[0.0], &[0.0]), None).unwrap();
        assert_eq!(r, 0.0);
        let r = stationarity_residual(&xy(), &PointZ::from_slices(&[1.0], &[0.0]), None).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn residual_on_boundary_drops_outward_component() {
        // L = x + y (x - 2) at x = 1, y = 0: grad_y = -1 points out of y >= 0
        let lag = FnSaddle::new(
            1,
            1,
            |x, y| x[0] + y[0] * (x[0] - 2.0),
            |x, y| (v(&[1.0 + y[0]]), v(&[x[0] - 2.0])),
        );
        let set = FeasibleSet::unbounded(1).product(&FeasibleSet::orthant(1));
        let r = stationarity_residual(&lag, &PointZ::from_slices(&[1.0], &[0.0]), Some(&set)).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn saddle_check_examples() {
        let origin = PointZ::from_slices(&[0.0], &[0.0]);
        assert!(saddle_inequality_check(&quad(), &origin, 200, 1.0, 1e-12, 1, None).unwrap().passed);
        assert!(saddle_inequality_check(&xy(), &origin, 200, 1.0, 1e-12, 1, None).unwrap().passed);
        let off = saddle_inequality_check(&xy(), &PointZ::from_slices(&[1.0], &[1.0]), 200, 1.0, 1e-12, 1, None)
            .unwrap();
        assert!(!off.passed);
        assert!(off.first_violation.is_some());
    }

    #[test]
    fn meta_validation() {
        let bad = ConvexityMeta {
            mu: Some(2.0),
            l: Some(1.0),
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InconsistentMeta(_))));
        assert_eq!(ConvexityMeta::default().require_mu(), Err(Error::MissingConstant("mu")));
    }

    #[test]
    fn default_hessians_from_gradient() {
        let p = quad();
        let hx = p.hess_xx(&v(&[0.3]), &v(&[0.1])).unwrap();
        let hy = p.hess_yy(&v(&[0.3]), &v(&[0.1])).unwrap();
        assert!((hx[(0, 0)] - 1.0).abs() < 1e-8);
        assert!((hy[(0, 0)] + 1.0).abs() < 1e-8);
    }
}
