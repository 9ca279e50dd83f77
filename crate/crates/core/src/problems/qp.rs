//! Strongly convex quadratic programs with affine inequality constraints.

use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{block_diag, rank, stack, sym_eig_extremes, Matrix, Vector};
use crate::objective::{AffineConstraints, ConvexObjective, QuadraticObjective};
use crate::problems::lagrangian::ConvexLagrangian;
use crate::saddle::ConvexityMeta;
use crate::transforms::{precondition, Preconditioned, SeparableProblem};

/// `min 1/2 x'Qx + p'x  s.t.  Ax - b <= 0` with constants computed exactly.
#[derive(Debug, Clone)]
pub struct QpAffine {
    pub f: Arc<QuadraticObjective>,
    pub a: Matrix,
    pub b: Vector,
    pub meta: ConvexityMeta,
}

pub fn make_qp_affine(q: Matrix, p: Vector, a: Matrix, b: Vector) -> Result<QpAffine> {
    let f = QuadraticObjective::new(q, p)?;
    if f.mu().unwrap_or(0.0) <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "Q",
            reason: "must be positive definite".into(),
        });
    }
    check_dim("constraint columns", f.dim(), a.ncols())?;
    check_dim("constraint rows", a.nrows(), b.len())?;
    if rank(&a, 1e-10) < a.nrows() {
        return Err(Error::RankDeficient("A"));
    }
    let (kappa, sigma) = sym_eig_extremes(&(&a * a.transpose()));
    let meta = ConvexityMeta {
        mu: f.mu(),
        q: None,
        l: f.l(),
        kappa: Some(kappa),
        sigma: Some(sigma),
    };
    Ok(QpAffine {
        f: Arc::new(f),
        a,
        b,
        meta,
    })
}

impl QpAffine {
    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn constraints(&self) -> Arc<AffineConstraints> {
        Arc::new(AffineConstraints {
            a: self.a.clone(),
            b: self.b.clone(),
        })
    }

    /// `f(x) + y'(Ax - b)`, `y >= 0`.
    pub fn lagrangian(&self) -> ConvexLagrangian {
        ConvexLagrangian::new(self.f.clone(), self.constraints()).expect("dimensions checked at build")
    }

    /// The preconditioned function over `(u, y)`.
    pub fn preconditioned(&self, eta: f64, alpha: f64) -> Result<Preconditioned> {
        precondition(self.f.clone(), self.a.clone(), self.b.clone(), eta, alpha)
    }
}

/// KKT point `(x, y)` of a strictly convex QP by enumerating active sets.
///
/// Each candidate active set `S` solves `[Q A_S'; A_S 0][x; y_S] = [-p; b_S]`;
/// the first candidate with `y_S >= 0` and `Ax <= b` is the unique optimum.
pub fn qp_kkt_oracle(q: &Matrix, p: &Vector, a: &Matrix, b: &Vector) -> Result<(Vector, Vector)> {
    let n = q.nrows();
    let m = a.nrows();
    if m > 20 {
        return Err(Error::SizeCap(format!("{m} constraints exceeds 20 for active-set enumeration")));
    }
    let tol = 1e-9;
    for mask in 0u32..(1u32 << m) {
        let active: Vec<usize> = (0..m).filter(|j| mask & (1 << j) != 0).collect();
        let k = active.len();
        if k > n {
            continue;
        }
        let mut kkt = Matrix::zeros(n + k, n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(q);
        let mut rhs = Vector::zeros(n + k);
        rhs.rows_mut(0, n).copy_from(&(-p));
        for (i, &j) in active.iter().enumerate() {
            for c in 0..n {
                kkt[(n + i, c)] = a[(j, c)];
                kkt[(c, n + i)] = a[(j, c)];
            }
            rhs[n + i] = b[j];
        }
        let Some(sol) = kkt.lu().solve(&rhs) else { continue };
        if !sol.iter().all(|v| v.is_finite()) {
            continue;
        }
        let x = sol.rows(0, n).into_owned();
        let mut y = Vector::zeros(m);
        for (i, &j) in active.iter().enumerate() {
            y[j] = sol[n + i];
        }
        let feasible = (a * &x - b).iter().all(|v| *v <= tol * (1.0 + b.amax()));
        if feasible && y.iter().all(|v| *v >= -tol) {
            return Ok((x, y.map(|v| v.max(0.0))));
        }
    }
    Err(Error::InvalidParameter {
        name: "qp",
        reason: "no KKT point found (infeasible constraints?)".into(),
    })
}

/// A separable QP together with its unseparated form.
#[derive(Clone)]
pub struct SeparableQp {
    pub separable: SeparableProblem,
    pub full: QpAffine,
}

/// `min 1/2 x_s'Q_s x_s + p_s'x_s + 1/2 x_c'Q_c x_c + p_c'x_c
///  s.t. A_s x_s + A_c x_c - b <= 0`.
pub fn make_separable_qp(
    q_s: Matrix,
    p_s: Vector,
    q_c: Matrix,
    p_c: Vector,
    a_s: Matrix,
    a_c: Matrix,
    b: Vector,
) -> Result<SeparableQp> {
    let f_s = QuadraticObjective::new(q_s.clone(), p_s.clone())?;
    let f_c = QuadraticObjective::new(q_c.clone(), p_c.clone())?;
    let separable = SeparableProblem::new(Arc::new(f_s), Arc::new(f_c), a_s.clone(), a_c.clone(), b.clone())?;
    let a = Matrix::from_fn(a_s.nrows(), a_s.ncols() + a_c.ncols(), |i, j| {
        if j < a_s.ncols() {
            a_s[(i, j)]
        } else {
            a_c[(i, j - a_s.ncols())]
        }
    });
    let full = make_qp_affine(block_diag(&q_s, &q_c), stack(&p_s, &p_c), a, b)?;
    Ok(SeparableQp { separable, full })
}
