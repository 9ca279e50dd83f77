//! Continuous-time saddle flow dynamics for convex-concave problems.
//!
//! A [`SaddleProblem`] is turned into a [`Flow`] (plain, augmented, proximal,
//! projected, preconditioned, reduced), integrated with [`integrate()`],
//! and checked against observable certificates and closed-form exponential
//! rate bounds from [`certificates`].

pub mod certificates;
pub mod error;
pub mod flows;
pub mod integrate;
pub mod linalg;
pub mod objective;
pub mod problems;
pub mod projection;
pub mod saddle;
pub mod transforms;

pub use certificates::{eval_certificate, Certificate, CertificateReport};
pub use error::{Error, Result};
pub use flows::Flow;
pub use integrate::{integrate, IntegratorConfig, Method, RateReport, Trajectory, Verdict};
pub use linalg::{Matrix, Vector};
pub use objective::{ConstraintMap, ConvexObjective};
pub use projection::FeasibleSet;
pub use saddle::{ConvexityMeta, FnSaddle, Gradient, PointZ, SaddleProblem};
