//! Vector fields `z -> F(z)` built from saddle problems and their transforms.
//!
//! Every flow descends in the first block and ascends in the second. When a
//! flow carries a feasible set, the vector field projection is applied inside
//! the field, so integrators only need to keep states on the set.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Result};
use crate::linalg::{split, stack, Matrix, Vector};
use crate::objective::{ConstraintMap, ConvexObjective};
use crate::problems::lagrangian::{ConvexLagrangian, LinearLagrangian};
use crate::projection::FeasibleSet;
use crate::saddle::SaddleProblem;
use crate::transforms::{augment, proximal_surrogate, InnerSolveConfig, LassoDualProx, Preconditioned, ProximalSurrogate, Reduced};

pub type FieldFn = dyn Fn(&Vector) -> Result<Vector> + Send + Sync;

/// An autonomous vector field with optional feasible set and known equilibrium.
#[derive(Clone)]
pub struct Flow {
    dim: usize,
    field: Arc<FieldFn>,
    feasible: Option<FeasibleSet>,
    equilibrium_hint: Option<Vector>,
    label: String,
}

impl fmt::Debug for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Flow")
            .field("dim", &self.dim)
            .field("feasible", &self.feasible)
            .field("equilibrium_hint", &self.equilibrium_hint)
            .field("label", &self.label)
            .finish()
    }
}

impl Flow {
    pub fn new<F>(dim: usize, label: impl Into<String>, field: F) -> Self
    where
        F: Fn(&Vector) -> Result<Vector> + Send + Sync + 'static,
    {
        Self {
            dim,
            field: Arc::new(field),
            feasible: None,
            equilibrium_hint: None,
            label: label.into(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_equilibrium(mut self, z_star: Vector) -> Result<Self> {
        check_dim("equilibrium hint", self.dim, z_star.len())?;
        self.equilibrium_hint = Some(z_star);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn feasible(&self) -> Option<&FeasibleSet> {
        self.feasible.as_ref()
    }

    pub fn equilibrium_hint(&self) -> Option<&Vector> {
        self.equilibrium_hint.as_ref()
    }

    /// Evaluates the (already projected) field.
    pub fn eval(&self, z: &Vector) -> Result<Vector> {
        check_dim("flow state", self.dim, z.len())?;
        let out = (self.field)(z)?;
        check_dim("flow output", self.dim, out.len())?;
        Ok(out)
    }

    /// `||F(z)||`, zero exactly at equilibria.
    pub fn residual(&self, z: &Vector) -> Result<f64> {
        Ok(self.eval(z)?.norm())
    }
}

/// `F(z) = (-grad_x S, +grad_y S)`, ignoring any problem domain.
pub fn standard_flow<P: SaddleProblem + 'static>(problem: P) -> Flow {
    let (n, m) = problem.dims();
    let hint = problem.known_saddle().map(|z| z.stacked());
    let p = Arc::new(problem);
    let mut flow = Flow::new(n + m, "standard", move |z: &Vector| {
        let (x, y) = split(z, n);
        let g = p.gradient(&x, &y)?;
        Ok(stack(&-g.x, &g.y))
    });
    flow.equilibrium_hint = hint;
    flow
}

/// The standard flow, projected onto the problem's domain when it has one.
pub fn saddle_flow<P: SaddleProblem + 'static>(problem: P) -> Flow {
    let domain = problem.domain();
    let flow = standard_flow(problem);
    match domain {
        Some(set) if !set.is_unbounded() => projected_flow(flow, set).expect("domain matches problem dimensions"),
        _ => flow,
    }
}

/// `F'(z) = Pi_set[z, F(z)]`.
pub fn projected_flow(flow: Flow, set: FeasibleSet) -> Result<Flow> {
    check_dim("feasible set", flow.dim, set.dim())?;
    let inner = flow.field.clone();
    let proj = set.clone();
    Ok(Flow {
        dim: flow.dim,
        field: Arc::new(move |z: &Vector| {
            let raw = inner(z)?;
            proj.project_vector_field(z, &raw)
        }),
        feasible: Some(set),
        equilibrium_hint: flow.equilibrium_hint,
        label: flow.label,
    })
}

/// Saddle flow of the augmented function over `(x, x_hat, y, y_hat)`.
///
/// Bounds of the problem's domain apply to `x` and `y`; the copies are free.
pub fn augmented_flow<P: SaddleProblem + 'static>(problem: P, rho: f64) -> Result<Flow> {
    Ok(saddle_flow(augment(problem, rho)?).with_label("augmented"))
}

/// Proximal saddle flow `u' = -(rho u - rho x~)`, `y' = grad_y S(x~, y)`.
pub fn proximal_flow<P: SaddleProblem + 'static>(surrogate: ProximalSurrogate<P>) -> Flow {
    saddle_flow(surrogate).with_label("proximal")
}

/// Augmented primal-dual dynamics for `min c'x s.t. Ax - b <= 0`.
pub fn augmented_primal_dual_lp(c: Vector, a: Matrix, b: Vector, rho: f64) -> Result<Flow> {
    augmented_primal_dual(LinearLagrangian::inequality(c, a, b)?, rho)
}

/// Augmented primal-dual dynamics for a linear program with equality and
/// inequality rows; only the inequality multipliers are sign constrained.
pub fn augmented_primal_dual(lagrangian: LinearLagrangian, rho: f64) -> Result<Flow> {
    Ok(augmented_flow(lagrangian, rho)?.with_label("augmented_primal_dual"))
}

/// Proximal primal-dual dynamics for `min f(x) s.t. g(x) <= 0`:
/// `u' = -(rho u - rho x~(u, y))`, `y' = [g(x~(u, y))]^+_y`.
pub fn proximal_primal_dual(
    f: Arc<dyn ConvexObjective>,
    g: Arc<dyn ConstraintMap>,
    rho: f64,
    inner: InnerSolveConfig,
) -> Result<Flow> {
    let lag = ConvexLagrangian::new(f, g)?;
    Ok(saddle_flow(proximal_surrogate(lag, rho, inner)?).with_label("proximal_primal_dual"))
}

/// Coordinates in which the preconditioned dynamics are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondSpace {
    /// Transformed coordinates `(u, y)`.
    Uy,
    /// Original coordinates `(x, y)` with `x = u - alpha A'y`.
    Xy,
}

/// Preconditioned primal-dual dynamics. Requires `2 eta > l alpha`.
pub fn preconditioned_pd(transform: Preconditioned, space: PrecondSpace) -> Result<Flow> {
    transform.check_concavity()?;
    let n = transform.a().ncols();
    let m = transform.a().nrows();
    let set = FeasibleSet::unbounded(n).product(transform.dual_set());
    match space {
        PrecondSpace::Uy => Ok(saddle_flow(transform).with_label("preconditioned_uy")),
        PrecondSpace::Xy => {
            let t = Arc::new(transform);
            let dual = set.slice(n, m);
            let field = move |z: &Vector| {
                let (x, y) = split(z, n);
                let a = t.a();
                let gf = t.objective().gradient(&x);
                let inner = &gf + a.transpose() * &y * t.eta();
                let raw = a * &inner * (-t.alpha()) + (a * &x - t.b()) * t.eta();
                let ydot = dual.project_vector_field(&y, &raw)?;
                let xdot = a.transpose() * &ydot * (-t.alpha()) - inner;
                Ok(stack(&xdot, &ydot))
            };
            let mut flow = Flow::new(n + m, "preconditioned_xy", field);
            flow.feasible = Some(set);
            Ok(flow)
        }
    }
}

/// Projected saddle flow of the reduced function over `(x_c, y)`.
pub fn reduced_pd(reduced: Reduced) -> Flow {
    saddle_flow(reduced).with_label("reduced_pd")
}

/// Saddle flow of the dual-regularized Lasso function over `(u, v)`:
/// `u' = -grad f(u - alpha A'y~) - A'y~`, `v' = rho y~ - rho v`.
pub fn lasso_flow<P: SaddleProblem + 'static>(lp: LassoDualProx<P>) -> Flow {
    saddle_flow(lp).with_label("lasso_pipeline")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{AffineConstraints, QuadraticObjective};
    use crate::saddle::FnSaddle;
    use crate::transforms::{precondition, reduce, SeparableProblem};

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn xy() -> FnSaddle {
        FnSaddle::new(1, 1, |x, y| x[0] * y[0], |x, y| (v(&[y[0]]), v(&[x[0]])))
    }

    #[test]
    fn standard_flow_examples() {
        let f = standard_flow(xy());
        assert_eq!(f.eval(&v(&[1.0, 0.0])).unwrap(), v(&[0.0, 1.0]));
        let q = FnSaddle::new(
            1,
            1,
            |x, y| 0.5 * x[0] * x[0] - 0.5 * y[0] * y[0],
            |x, y| (v(&[x[0]]), v(&[-y[0]])),
        );
        let f = standard_flow(q);
        assert_eq!(f.eval(&v(&[2.0, 2.0])).unwrap(), v(&[-2.0, -2.0]));
        assert_eq!(f.eval(&v(&[0.0, 0.0])).unwrap(), v(&[0.0, 0.0]));
    }

    #[test]
    fn augmented_flow_examples() {
        let f = augmented_flow(xy(), 1.0).unwrap();
        assert_eq!(f.eval(&v(&[0.0; 4])).unwrap(), v(&[0.0; 4]));
        assert_eq!(f.eval(&v(&[1.0; 4])).unwrap(), v(&[-1.0, 0.0, 1.0, 0.0]));
        let f = augmented_flow(xy(), 2.0).unwrap();
        assert_eq!(f.eval(&v(&[1.0, 0.0, 0.0, 0.0])).unwrap(), v(&[-2.0, 2.0, 1.0, 0.0]));
    }

    #[test]
    fn proximal_flow_examples() {
        let s = FnSaddle::new(
            1,
            1,
            |x, y| 0.5 * x[0] * x[0] + y[0] * x[0],
            |x, y| (v(&[x[0] + y[0]]), v(&[x[0]])),
        );
        let f = proximal_flow(proximal_surrogate(s, 1.0, InnerSolveConfig::default()).unwrap());
        let out = f.eval(&v(&[1.0, 0.0])).unwrap();
        assert!((out - v(&[-0.5, 0.5])).norm() < 1e-12);
        assert!(f.eval(&v(&[0.0, 0.0])).unwrap().norm() < 1e-14);
        let out = f.eval(&v(&[0.0, 1.0])).unwrap();
        assert!((out - v(&[-0.5, -0.5])).norm() < 1e-12);
    }

    #[test]
    fn projected_flow_examples() {
        let lag = FnSaddle::new(1, 1, |x, y| y[0] * (x[0] - 1.0), |x, y| (v(&[y[0]]), v(&[x[0] - 1.0])));
        let set = FeasibleSet::unbounded(1).product(&FeasibleSet::orthant(1));
        let f = projected_flow(standard_flow(lag), set).unwrap();
        // x = 0: raw y' = -1 at y = 0 is removed
        assert_eq!(f.eval(&v(&[0.0, 0.0])).unwrap(), v(&[0.0, 0.0]));
        assert_eq!(f.eval(&v(&[2.0, 0.0])).unwrap(), v(&[0.0, 1.0]));
        assert_eq!(f.eval(&v(&[0.0, 1.0])).unwrap(), v(&[-1.0, -1.0]));
        assert!(f.eval(&v(&[0.0, -1.0])).is_err());
    }

    #[test]
    fn augmented_lp_examples() {
        let one = Matrix::from_element(1, 1, 1.0);
        let f = augmented_primal_dual_lp(v(&[0.0]), one.clone(), v(&[0.0]), 1.0).unwrap();
        assert_eq!(f.eval(&v(&[0.0; 4])).unwrap(), v(&[0.0; 4]));
        let f = augmented_primal_dual_lp(v(&[1.0]), one.clone(), v(&[1.0]), 1.0).unwrap();
        assert_eq!(f.eval(&v(&[1.0, 1.0, 0.0, 0.0])).unwrap()[2], 0.0);
        let f = augmented_primal_dual_lp(v(&[1.0]), one, v(&[0.0]), 1.0).unwrap();
        let out = f.eval(&v(&[0.0, 0.0, 1.0, 1.0])).unwrap();
        assert_eq!((out[0], out[2]), (-2.0, 0.0));
    }

    #[test]
    fn proximal_primal_dual_examples() {
        let f = proximal_primal_dual(
            Arc::new(QuadraticObjective::isotropic(1, 1.0)),
            Arc::new(AffineConstraints::new(Matrix::from_element(1, 1, 1.0), v(&[1.0])).unwrap()),
            1.0,
            InnerSolveConfig::default(),
        )
        .unwrap();
        let out = f.eval(&v(&[1.0, 0.0])).unwrap();
        assert!((out - v(&[-0.5, 0.0])).norm() < 1e-12);
        let out = f.eval(&v(&[2.0, 1.0])).unwrap();
        assert!((out - v(&[-1.5, -0.5])).norm() < 1e-12);
        // min x^2/2 s.t. x <= 1 has its optimum at the origin with y = 0
        assert!(f.eval(&v(&[0.0, 0.0])).unwrap().norm() < 1e-12);
    }

    fn scalar_precond(eta: f64) -> Preconditioned {
        precondition(
            Arc::new(QuadraticObjective::isotropic(1, 1.0)),
            Matrix::from_element(1, 1, 1.0),
            v(&[0.0]),
            eta,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn preconditioned_examples() {
        for space in [PrecondSpace::Uy, PrecondSpace::Xy] {
            let f = preconditioned_pd(scalar_precond(1.5), space).unwrap();
            assert_eq!(f.eval(&v(&[0.0, 0.0])).unwrap(), v(&[0.0, 0.0]));
        }
        let f = preconditioned_pd(scalar_precond(1.5), PrecondSpace::Uy).unwrap();
        // grad_y = -1 + 1.5 = 0.5 at (u, y) = (1, 0): inward, kept
        let out = f.eval(&v(&[1.0, 0.0])).unwrap();
        assert_eq!(out[0], -1.0);
        let f = preconditioned_pd(scalar_precond(1.0), PrecondSpace::Uy).unwrap();
        assert_eq!(f.eval(&v(&[1.0, 0.0])).unwrap(), v(&[-1.0, 0.0]));
        assert!(preconditioned_pd(scalar_precond(0.4), PrecondSpace::Uy).is_err());
    }

    #[test]
    fn reduced_examples() {
        let sep = SeparableProblem::new(
            Arc::new(QuadraticObjective::isotropic(1, 1.0)),
            Arc::new(QuadraticObjective::isotropic(1, 1.0)),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
            v(&[0.0]),
        )
        .unwrap();
        let f = reduced_pd(reduce(sep, InnerSolveConfig::default()).unwrap());
        let out = f.eval(&v(&[1.0, 1.0])).unwrap();
        assert!((out - v(&[-2.0, 0.0])).norm() < 1e-12);
        // at y = 0 the reduced dual gradient is x_c = 2 > 0: kept
        let out = f.eval(&v(&[2.0, 0.0])).unwrap();
        assert!((out - v(&[-2.0, 2.0])).norm() < 1e-12);
        // x_c = -1, y = 0: gradient -1 points outward and is removed
        let out = f.eval(&v(&[-1.0, 0.0])).unwrap();
        assert!((out - v(&[1.0, 0.0])).norm() < 1e-12);
    }
}
