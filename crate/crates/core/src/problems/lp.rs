//! Linear programs, their Lagrangians, and an exhaustive vertex-enumeration
//! reference solver for small instances.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{rank, vstack, Matrix, Vector};
use crate::problems::lagrangian::LinearLagrangian;

/// `min c'x  s.t.  Ax - b <= 0,  A_eq x - b_eq = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub c: Vector,
    pub a: Matrix,
    pub b: Vector,
    pub a_eq: Matrix,
    pub b_eq: Vector,
}

impl LinearProgram {
    pub fn new(c: Vector, a: Matrix, b: Vector) -> Result<Self> {
        let n = c.len();
        check_dim("inequality columns", n, a.ncols())?;
        check_dim("inequality rows", a.nrows(), b.len())?;
        for v in c.iter().chain(a.iter()).chain(b.iter()) {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "linear program",
                    reason: "entries must be finite".into(),
                });
            }
        }
        Ok(Self {
            c,
            a,
            b,
            a_eq: Matrix::zeros(0, n),
            b_eq: Vector::zeros(0),
        })
    }

    pub fn with_equalities(mut self, a_eq: Matrix, b_eq: Vector) -> Result<Self> {
        check_dim("equality columns", self.c.len(), a_eq.ncols())?;
        check_dim("equality rows", a_eq.nrows(), b_eq.len())?;
        self.a_eq = a_eq;
        self.b_eq = b_eq;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn objective(&self, x: &Vector) -> f64 {
        self.c.dot(x)
    }

    /// Largest constraint violation at `x`.
    pub fn violation(&self, x: &Vector) -> f64 {
        let ineq = (&self.a * x - &self.b).iter().fold(0.0f64, |acc, v| acc.max(*v));
        let eq = (&self.a_eq * x - &self.b_eq).amax();
        ineq.max(eq)
    }
}

/// Lagrangian `c'x + y_eq'(A_eq x - b_eq) + y_in'(Ax - b)`.
pub fn make_lp(lp: &LinearProgram) -> Result<LinearLagrangian> {
    LinearLagrangian::new(
        lp.c.clone(),
        lp.a_eq.clone(),
        lp.b_eq.clone(),
        lp.a.clone(),
        lp.b.clone(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vector, value: f64 },
    Infeasible,
    Unbounded,
}

/// Largest `n + (inequality rows)` accepted by [`lp_oracle`].
pub const LP_ORACLE_MAX_SIZE: usize = 24;

const TOL: f64 = 1e-9;

/// Visits every `k`-subset of `0..m` in lexicographic order.
fn for_each_subset(m: usize, k: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !visit(&idx) {
            return;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < m - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn select_rows(a: &Matrix, rows: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)])
}

fn select_entries(b: &Vector, rows: &[usize]) -> Vector {
    Vector::from_fn(rows.len(), |i, _| b[rows[i]])
}

/// Orthonormal basis of the null space of `a`, via the SVD of `a` padded with
/// zero rows to at least square shape.
fn null_space(a: &Matrix) -> Vec<Vector> {
    let n = a.ncols();
    let rows = a.nrows().max(n);
    let padded = Matrix::from_fn(rows, n, |i, j| if i < a.nrows() { a[(i, j)] } else { 0.0 });
    let svd = padded.svd(false, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let v_t = svd.v_t.expect("requested right singular vectors");
    (0..n)
        .filter(|&j| svd.singular_values[j] <= 1e-10 * smax.max(1.0))
        .map(|j| v_t.row(j).transpose())
        .collect()
}

/// Exact optimum by enumerating the vertices of the feasible polyhedron.
///
/// Directions along which every constraint is constant (the lineality space)
/// are handled first: a cost with a component along them makes a feasible
/// program unbounded; otherwise they are pinned to zero, which leaves the
/// optimal value unchanged and makes the polyhedron pointed. Unboundedness of
/// the pointed program is detected by enumerating extreme rays.
pub fn lp_oracle(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.n();
    let m_in = lp.a.nrows();
    if n + m_in > LP_ORACLE_MAX_SIZE {
        return Err(Error::SizeCap(format!(
            "{n} variables + {m_in} inequality rows exceeds {LP_ORACLE_MAX_SIZE}"
        )));
    }
    let scale = 1.0 + lp.c.amax();

    let lineality = null_space(&vstack(&lp.a_eq, &lp.a));
    let c_along_lines = lineality.iter().map(|d| lp.c.dot(d).abs()).fold(0.0, f64::max);

    let mut a_eq = lp.a_eq.clone();
    let mut b_eq = lp.b_eq.clone();
    if !lineality.is_empty() {
        let pin = Matrix::from_fn(lineality.len(), n, |i, j| lineality[i][j]);
        a_eq = vstack(&a_eq, &pin);
        b_eq = crate::linalg::stack(&b_eq, &Vector::zeros(lineality.len()));
    }
    let r_eq = rank(&a_eq, 1e-10);
    if r_eq > n {
        return Ok(LpOutcome::Infeasible);
    }
    let k = n - r_eq;

    let mut best: Option<(Vector, f64)> = None;
    for_each_subset(m_in, k, |rows| {
        let m_s = vstack(&a_eq, &select_rows(&lp.a, rows));
        let rhs = crate::linalg::stack(&b_eq, &select_entries(&lp.b, rows));
        if rank(&m_s, 1e-10) < n {
            return true;
        }
        let Ok(x) = m_s.clone().svd(true, true).solve(&rhs, 1e-12) else {
            return true;
        };
        let rscale = 1.0 + rhs.amax();
        if (&m_s * &x - &rhs).amax() > TOL * rscale {
            return true;
        }
        if (&lp.a * &x - &lp.b).iter().any(|v| *v > TOL * (1.0 + lp.b.amax())) {
            return true;
        }
        let value = lp.c.dot(&x);
        if best.as_ref().is_none_or(|(_, bv)| value < *bv - 1e-12 * (1.0 + bv.abs())) {
            best = Some((x, value));
        }
        true
    });

    let Some((x, value)) = best else {
        return Ok(LpOutcome::Infeasible);
    };
    if c_along_lines > TOL * scale {
        return Ok(LpOutcome::Unbounded);
    }

    // Extreme rays: one-dimensional solutions of n - 1 independent active rows.
    let mut unbounded = false;
    if k >= 1 {
        for_each_subset(m_in, k - 1, |rows| {
            let m_r = vstack(&a_eq, &select_rows(&lp.a, rows));
            let basis = null_space(&m_r);
            if basis.len() != 1 {
                return true;
            }
            let d = &basis[0];
            for s in [1.0, -1.0] {
                let dd = d * s;
                if (&lp.a * &dd).iter().all(|v| *v <= TOL) && lp.c.dot(&dd) < -TOL * scale {
                    unbounded = true;
                    return false;
                }
            }
            true
        });
    }
    if unbounded {
        return Ok(LpOutcome::Unbounded);
    }
    Ok(LpOutcome::Optimal { x, value })
}
