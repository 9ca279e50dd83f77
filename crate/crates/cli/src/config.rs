//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use saddleflow::{IntegratorConfig, Matrix, Method, Vector};
use serde::Deserialize;

use crate::CliError;

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub problem: ProblemConfig,
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub integrator: IntegratorSection,
    /// Starting state; drawn from the seed when absent.
    pub initial: Option<Vec<f64>>,
    /// Directory of the config file, used to resolve relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// `S = x'My`. Uses `matrix`, else a random `n x m` matrix, else `M = 1`.
    Bilinear {
        matrix: Option<Rows>,
        n: Option<usize>,
        m: Option<usize>,
    },
    /// `mu/2 |x|^2 + x'By - q/2 |y|^2`, random `B` scaled to spectral norm 1
    /// unless given.
    QuadraticSaddle {
        mu: f64,
        q: f64,
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_m")]
        m: usize,
        b: Option<Rows>,
    },
    /// `min c'x` s.t. `Ax <= b` and optionally `A_eq x = b_eq`.
    Lp {
        c: Vec<f64>,
        a: Rows,
        b: Vec<f64>,
        a_eq: Option<Rows>,
        b_eq: Option<Vec<f64>>,
    },
    /// Network from `file`, else the seeded synthetic network.
    MinCostFlow {
        file: Option<PathBuf>,
        network_seed: Option<u64>,
    },
    /// `min 1/2 x'Qx + p'x` s.t. `Ax <= b`.
    QpAffine { q: Rows, p: Vec<f64>, a: Rows, b: Vec<f64> },
    SeparableQp {
        q_s: Rows,
        p_s: Vec<f64>,
        q_c: Rows,
        p_c: Vec<f64>,
        a_s: Rows,
        a_c: Rows,
        b: Vec<f64>,
    },
    /// `1/2 |Ax - b|^2 + lambda |x|_1`, with random sparse data of size
    /// `m x n` unless `a` and `b` are given.
    Lasso {
        lambda: f64,
        a: Option<Rows>,
        b: Option<Vec<f64>>,
        #[serde(default = "default_lasso_n")]
        n: usize,
        #[serde(default = "default_lasso_m")]
        m: usize,
    },
}

fn default_n() -> usize {
    3
}

fn default_m() -> usize {
    2
}

fn default_lasso_n() -> usize {
    10
}

fn default_lasso_m() -> usize {
    15
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    #[default]
    Uy,
    Xy,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmConfig {
    Standard,
    Augmented {
        rho: f64,
    },
    /// `rho` defaults to the rate-optimal value when the constants are known.
    Proximal {
        rho: Option<f64>,
        inner_tol: Option<f64>,
    },
    /// `eta` and `alpha` default to the rate-`mu` choice.
    Preconditioned {
        #[serde(default)]
        space: Space,
        eta: Option<f64>,
        alpha: Option<f64>,
    },
    Reduced {
        inner_tol: Option<f64>,
    },
    /// `alpha` defaults to `1 / l`.
    LassoPipeline {
        #[serde(default = "default_lasso_rho")]
        rho: f64,
        alpha: Option<f64>,
        inner_tol: Option<f64>,
    },
}

fn default_lasso_rho() -> f64 {
    1.0
}

impl AlgorithmConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmConfig::Standard => "standard",
            AlgorithmConfig::Augmented { .. } => "augmented",
            AlgorithmConfig::Proximal { .. } => "proximal",
            AlgorithmConfig::Preconditioned { space: Space::Uy, .. } => "preconditioned_uy",
            AlgorithmConfig::Preconditioned { space: Space::Xy, .. } => "preconditioned_xy",
            AlgorithmConfig::Reduced { .. } => "reduced",
            AlgorithmConfig::LassoPipeline { .. } => "lasso_pipeline",
        }
    }
}

impl ProblemConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemConfig::Bilinear { .. } => "bilinear",
            ProblemConfig::QuadraticSaddle { .. } => "quadratic_saddle",
            ProblemConfig::Lp { .. } => "lp",
            ProblemConfig::MinCostFlow { .. } => "min_cost_flow",
            ProblemConfig::QpAffine { .. } => "qp_affine",
            ProblemConfig::SeparableQp { .. } => "separable_qp",
            ProblemConfig::Lasso { .. } => "lasso",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    #[default]
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default)]
    pub method: MethodName,
    pub step: Option<f64>,
    pub horizon: Option<f64>,
    pub record_every: Option<usize>,
    pub clamp: Option<bool>,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            method: MethodName::Rk4,
            step: None,
            horizon: None,
            record_every: None,
            clamp: None,
        }
    }
}

impl IntegratorSection {
    pub fn to_config(&self) -> Result<IntegratorConfig, CliError> {
        let d = IntegratorConfig::default();
        let cfg = IntegratorConfig::new(self.step.unwrap_or(d.step), self.horizon.unwrap_or(d.horizon))
            .with_method(match self.method {
                MethodName::Rk4 => Method::Rk4,
                MethodName::Euler => Method::Euler,
            })
            .with_record_every(self.record_every.unwrap_or(d.record_every))
            .with_clamp(self.clamp.unwrap_or(d.clamp));
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}

pub fn matrix(name: &str, rows: &Rows) -> Result<Matrix, CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(CliError::Config(format!("matrix {name} is empty")));
    }
    if rows.iter().any(|row| row.len() != c) {
        return Err(CliError::Config(format!("matrix {name} has rows of different lengths")));
    }
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn vector(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}
