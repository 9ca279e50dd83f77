//! Concrete problem builders and reference solvers.

pub mod basic;
pub mod lagrangian;
pub mod lasso;
pub mod lp;
pub mod network;
pub mod qp;

pub use basic::{make_bilinear, make_quadratic_saddle, Bilinear, QuadraticSaddle};
pub use lagrangian::{ConvexLagrangian, LinearLagrangian};
pub use lasso::{lasso_oracle, make_lasso, LassoPipeline, LassoProblem};
pub use lp::{lp_oracle, make_lp, LinearProgram, LpOutcome, LP_ORACLE_MAX_SIZE};
pub use network::{make_min_cost_flow, Edge, FlowNetwork, MinCostFlow};
pub use qp::{make_qp_affine, make_separable_qp, qp_kkt_oracle, QpAffine, SeparableQp};
pub use crate::transforms::SeparableProblem;
