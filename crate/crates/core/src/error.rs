use thiserror::Error;

/// Errors raised by problem construction, transforms, integration and rate bounds.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {block}: expected {expected}, found {found}")]
    DimensionMismatch {
        block: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point outside feasible set at coordinate {coord}: {value} not in [{lower}, {upper}]")]
    OutsideSet {
        coord: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("inner solve did not converge after {iterations} iterations (residual {residual:e})")]
    InnerSolve { iterations: usize, residual: f64 },

    #[error("non-finite state encountered; last finite time {time}")]
    NonFinite { time: f64 },

    #[error("convexity constant {0} is required but was not supplied")]
    MissingConstant(&'static str),

    #[error("inconsistent convexity metadata: {0}")]
    InconsistentMeta(String),

    #[error("parameter condition violated: {0}")]
    ConditionViolated(String),

    #[error("too few usable samples for a rate fit: {found} (need at least {needed})")]
    TooFewSamples { found: usize, needed: usize },

    #[error("instance too large for exhaustive oracle: {0}")]
    SizeCap(String),

    #[error("network injections are unbalanced: sum is {0}")]
    Unbalanced(f64),

    #[error("matrix {0} is rank deficient")]
    RankDeficient(&'static str),

    #[error("point is not a saddle point (stationarity residual {residual:e})")]
    NotSaddle { residual: f64 },

    #[error("reference solver hit its iteration cap ({iterations}) with residual {residual:e}")]
    IterationCap { iterations: usize, residual: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(block: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            block,
            expected,
            found,
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {value}"),
        })
    }
}
