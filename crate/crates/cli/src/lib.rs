//! Experiment runner for saddle flow dynamics: builds a flow from a TOML
//! config, integrates it and writes CSV artifacts plus a text report.

pub mod config;
pub mod runner;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 1 for configuration, usage and file problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<saddleflow::Error> for CliError {
    fn from(e: saddleflow::Error) -> Self {
        use saddleflow::Error as E;
        match e {
            E::InnerSolve { .. }
            | E::NonFinite { .. }
            | E::IterationCap { .. }
            | E::TooFewSamples { .. }
            | E::NotSaddle { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(saddleflow::Error::NonFinite { time: 1.0 }).exit_code(), 2);
        assert_eq!(CliError::from(saddleflow::Error::MissingConstant("mu")).exit_code(), 1);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
    }
}
