//! Saddle-point-preserving transformations of a problem.

pub mod augment;
pub mod inner;
pub mod lasso;
pub mod precondition;
pub mod proximal;
pub mod reduce;

pub use augment::{augment, AugmentedProblem};
pub use inner::{InnerSolveConfig, WarmStart};
pub use lasso::{lasso_dual_prox, lasso_reformulate, LassoDualProx, LassoReformulation, LassoSplitObjective};
pub use precondition::{precondition, Preconditioned};
pub use proximal::{proximal_surrogate, ProximalSurrogate};
pub use reduce::{reduce, Reduced, SeparableProblem};
