//! Box and orthant feasible sets, point projection, and the vector field
//! projection used by every projected flow.
//!
//! For a box `P = [lower, upper]` the vector field projection of `s` at `p`,
//! the one-sided directional derivative of the point projection, acts
//! coordinate-wise: interior coordinates pass `s_j` through, a coordinate on
//! its lower face keeps only `max(s_j, 0)`, and one on its upper face keeps
//! only `min(s_j, 0)`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::Vector;

/// Absolute tolerance within which a point is snapped onto the set.
pub const SNAP_TOL: f64 = 1e-12;

/// Axis-aligned box `{ z : lower <= z <= upper }`, bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    lower: Vector,
    upper: Vector,
}

impl FeasibleSet {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim("feasible set bounds", lower.len(), upper.len())?;
        for j in 0..lower.len() {
            let (lo, hi) = (lower[j], upper[j]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
            {
                return Err(Error::InvalidParameter {
                    name: "feasible set",
                    reason: format!("coordinate {j} has empty interval [{lo}, {hi}]"),
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// All of `R^dim`.
    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: Vector::from_element(dim, f64::NEG_INFINITY),
            upper: Vector::from_element(dim, f64::INFINITY),
        }
    }

    /// The nonnegative orthant of `R^dim`.
    pub fn orthant(dim: usize) -> Self {
        Self {
            lower: Vector::zeros(dim),
            upper: Vector::from_element(dim, f64::INFINITY),
        }
    }

    /// Uniform box `[lo, hi]^dim`.
    pub fn uniform_box(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(Vector::from_element(dim, lo), Vector::from_element(dim, hi))
    }

    /// Cartesian product `self x other`.
    pub fn product(&self, other: &FeasibleSet) -> FeasibleSet {
        FeasibleSet {
            lower: crate::linalg::stack(&self.lower, &other.lower),
            upper: crate::linalg::stack(&self.upper, &other.upper),
        }
    }

    /// Restriction to the coordinates `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> FeasibleSet {
        FeasibleSet {
            lower: self.lower.rows(start, len).into_owned(),
            upper: self.upper.rows(start, len).into_owned(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }

    /// True when no coordinate carries a finite bound.
    pub fn is_unbounded(&self) -> bool {
        self.lower.iter().all(|l| *l == f64::NEG_INFINITY)
            && self.upper.iter().all(|u| *u == f64::INFINITY)
    }

    pub fn contains(&self, p: &Vector, tol: f64) -> bool {
        p.len() == self.dim()
            && p
                .iter()
                .enumerate()
                .all(|(j, v)| *v >= self.lower[j] - tol && *v <= self.upper[j] + tol)
    }

    /// Euclidean projection: element-wise clamp onto `[lower, upper]`.
    pub fn project_point(&self, r: &Vector) -> Result<Vector> {
        check_dim("projected point", self.dim(), r.len())?;
        Ok(self.clamp(r))
    }

    pub(crate) fn clamp(&self, r: &Vector) -> Vector {
        Vector::from_iterator(
            r.len(),
            r.iter()
                .enumerate()
                .map(|(j, v)| v.max(self.lower[j]).min(self.upper[j])),
        )
    }

    /// Clamps `p` onto the set if it lies within [`SNAP_TOL`] of it.
    pub fn snap(&self, p: &Vector) -> Result<Vector> {
        check_dim("snapped point", self.dim(), p.len())?;
        for (j, v) in p.iter().enumerate() {
            if !(*v >= self.lower[j] - SNAP_TOL && *v <= self.upper[j] + SNAP_TOL) {
                return Err(Error::OutsideSet {
                    coord: j,
                    value: *v,
                    lower: self.lower[j],
                    upper: self.upper[j],
                });
            }
        }
        Ok(self.clamp(p))
    }

    /// Vector field projection of `s` at the feasible point `p`.
    pub fn project_vector_field(&self, p: &Vector, s: &Vector) -> Result<Vector> {
        check_dim("vector field", self.dim(), s.len())?;
        let p = self.snap(p)?;
        Ok(Vector::from_iterator(
            s.len(),
            s.iter().enumerate().map(|(j, &sj)| {
                if p[j] == self.lower[j] && p[j] == self.upper[j] {
                    0.0
                } else if p[j] == self.lower[j] {
                    sj.max(0.0)
                } else if p[j] == self.upper[j] {
                    sj.min(0.0)
                } else {
                    sj
                }
            }),
        ))
    }
}
