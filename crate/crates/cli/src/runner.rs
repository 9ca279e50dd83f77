//! Builds flows from a config, integrates them and writes the artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use saddleflow::certificates::{
    cert_augmented, cert_proximal, cert_strict_cc, eval_certificate, optimal_rho, precond_k, precond_params_pick,
    rate_bound_precond, rate_bound_proximal, rate_bound_reduced, rate_bound_strong, Observability,
};
use saddleflow::flows::{
    augmented_flow, augmented_primal_dual, preconditioned_pd, proximal_flow, reduced_pd, saddle_flow, PrecondSpace,
};
use saddleflow::integrate::{
    detect_equilibrium, distance_series, envelope_check, fit_rate, lyapunov_series, reference_equilibrium,
    DEFAULT_FLOOR,
};
use saddleflow::linalg::spectral_norm;
use saddleflow::problems::{
    lasso_oracle, lp_oracle, make_bilinear, make_lasso, make_lp, make_min_cost_flow, make_qp_affine,
    make_quadratic_saddle, make_separable_qp, qp_kkt_oracle, FlowNetwork, LinearLagrangian, LinearProgram, LpOutcome,
    QpAffine, SeparableQp,
};
use saddleflow::transforms::{augment, proximal_surrogate, reduce, InnerSolveConfig};
use saddleflow::{integrate, Certificate, Flow, Matrix, PointZ, SaddleProblem, Trajectory, Vector};

use crate::config::{matrix, vector, AlgorithmConfig, ExperimentConfig, ProblemConfig, Space};
use crate::CliError;

/// Residual below which a run counts as converged.
pub const CONVERGED_TOL: f64 = 1e-6;

type PostCheck = Box<dyn Fn(&Vector) -> Result<Vec<String>, CliError>>;

/// A flow ready to integrate, with whatever reference data is known for it.
struct Prepared {
    flow: Flow,
    z_star: Option<Vector>,
    bound: Option<(f64, &'static str)>,
    envelope: Option<(f64, f64)>,
    certificate: Option<Certificate>,
    notes: Vec<String>,
    post: Option<PostCheck>,
}

impl Prepared {
    fn new(flow: Flow) -> Self {
        Self {
            flow,
            z_star: None,
            bound: None,
            envelope: None,
            certificate: None,
            notes: Vec::new(),
            post: None,
        }
    }
}

/// One row of a comparison table.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub name: String,
    pub problem: String,
    pub algorithm: String,
    pub c_bound: Option<f64>,
    pub c_fit: Option<f64>,
    pub wall_time: f64,
    pub final_residual: f64,
    pub report: String,
}

fn incompatible(cfg: &ExperimentConfig) -> CliError {
    CliError::Config(format!(
        "algorithm {} is not available for problem {}",
        cfg.algorithm.name(),
        cfg.problem.name()
    ))
}

fn positive(v: Option<f64>) -> Option<f64> {
    v.filter(|x| *x > 0.0 && x.is_finite())
}

fn inner_config(tol: Option<f64>) -> InnerSolveConfig {
    let mut inner = InnerSolveConfig::default();
    if let Some(t) = tol {
        inner.tol = t;
    }
    inner
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn stack(a: &Vector, b: &Vector) -> Vector {
    Vector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

/// Plain, augmented and proximal flows for problems with a known saddle.
fn saddle_family<P>(problem: P, cfg: &ExperimentConfig, strong: Option<(f64, f64)>) -> Result<Prepared, CliError>
where
    P: SaddleProblem + Clone + 'static,
{
    let saddle = problem.known_saddle();
    match &cfg.algorithm {
        AlgorithmConfig::Standard => {
            let mut prep = Prepared::new(saddle_flow(problem.clone()));
            prep.z_star = saddle.as_ref().map(PointZ::stacked);
            if let Some((mu, q)) = strong {
                prep.bound = Some((rate_bound_strong(mu, q)?, "strong"));
                if let Some(z) = &saddle {
                    prep.certificate = Some(cert_strict_cc(problem, z)?);
                }
            }
            Ok(prep)
        }
        AlgorithmConfig::Augmented { rho } => {
            let aug = augment(problem.clone(), *rho)?;
            let mut prep = Prepared::new(augmented_flow(problem, *rho)?);
            prep.notes.push(format!("rho: {rho}"));
            if let Some(z) = aug.known_saddle() {
                prep.z_star = Some(z.stacked());
                prep.certificate = Some(cert_augmented(aug, &z)?);
            }
            Ok(prep)
        }
        AlgorithmConfig::Proximal { rho, inner_tol } => {
            let meta = problem.meta();
            let consts = match (positive(meta.mu), positive(meta.l), positive(meta.kappa)) {
                (Some(mu), Some(l), Some(kappa)) => Some((mu, l, kappa)),
                _ => None,
            };
            let rho = match (rho, consts) {
                (Some(r), _) => *r,
                (None, Some((mu, l, kappa))) => optimal_rho(mu, l, kappa)?.0,
                (None, None) => {
                    return Err(CliError::Config(
                        "proximal needs rho when mu, l and kappa are not all positive".into(),
                    ))
                }
            };
            let sur = proximal_surrogate(problem, rho, inner_config(*inner_tol))?;
            let mut prep = Prepared::new(proximal_flow(sur.clone()));
            prep.notes.push(format!("rho: {rho}"));
            if let Some((mu, l, kappa)) = consts {
                prep.bound = Some((rate_bound_proximal(mu, l, kappa, rho)?, "proximal"));
            }
            if let Some(z) = saddle {
                prep.z_star = Some(z.stacked());
                prep.certificate = Some(cert_proximal(sur, &z)?);
            }
            Ok(prep)
        }
        _ => Err(incompatible(cfg)),
    }
}

fn lp_family(lag: LinearLagrangian, lp: LinearProgram, cfg: &ExperimentConfig) -> Result<Prepared, CliError> {
    let n = lp.n();
    let mut prep = match &cfg.algorithm {
        AlgorithmConfig::Standard => Prepared::new(saddle_flow(lag)),
        AlgorithmConfig::Augmented { rho } => {
            let mut p = Prepared::new(augmented_primal_dual(lag, *rho)?);
            p.notes.push(format!("rho: {rho}"));
            p
        }
        AlgorithmConfig::Proximal { rho, inner_tol } => {
            let rho = rho.ok_or_else(|| CliError::Config("proximal on a linear program needs rho".into()))?;
            let mut p = Prepared::new(proximal_flow(proximal_surrogate(lag, rho, inner_config(*inner_tol))?));
            p.notes.push(format!("rho: {rho}"));
            p
        }
        _ => return Err(incompatible(cfg)),
    };
    let oracle = lp_oracle(&lp);
    prep.post = Some(Box::new(move |z: &Vector| {
        let x = z.rows(0, n).into_owned();
        let value = lp.objective(&x);
        let mut lines = vec![
            format!("objective: {value:.10e}"),
            format!("constraint_violation: {:.3e}", lp.violation(&x)),
        ];
        match &oracle {
            Ok(LpOutcome::Optimal { value: best, .. }) => {
                let rel = (value - best).abs() / best.abs().max(1e-12);
                lines.push(format!("oracle_objective: {best:.10e} (relative gap {rel:.3e})"));
            }
            Ok(other) => lines.push(format!("oracle: {other:?}")),
            Err(e) => lines.push(format!("oracle: unavailable ({e})")),
        }
        Ok(lines)
    }));
    Ok(prep)
}

fn qp_family(qp: QpAffine, separable: Option<SeparableQp>, cfg: &ExperimentConfig) -> Result<Prepared, CliError> {
    let (x_star, y_star) = qp_kkt_oracle(qp.f.q(), qp.f.p(), &qp.a, &qp.b)?;
    let meta = qp.meta;
    let lag = qp.lagrangian();
    match &cfg.algorithm {
        AlgorithmConfig::Standard => {
            let mut prep = Prepared::new(saddle_flow(lag));
            prep.z_star = Some(stack(&x_star, &y_star));
            Ok(prep)
        }
        AlgorithmConfig::Augmented { rho } => {
            let aug = augment(lag.clone(), *rho)?;
            let mut prep = Prepared::new(augmented_flow(lag, *rho)?);
            prep.notes.push(format!("rho: {rho}"));
            let z = PointZ::new(stack(&x_star, &x_star), stack(&y_star, &y_star));
            prep.z_star = Some(z.stacked());
            prep.certificate = Some(cert_augmented(aug, &z)?);
            Ok(prep)
        }
        AlgorithmConfig::Proximal { rho, inner_tol } => {
            let (mu, l, kappa) = (meta.require_mu()?, meta.require_l()?, meta.require_kappa()?);
            let rho = match rho {
                Some(r) => *r,
                None => optimal_rho(mu, l, kappa)?.0,
            };
            let sur = proximal_surrogate(lag, rho, inner_config(*inner_tol))?;
            let mut prep = Prepared::new(proximal_flow(sur.clone()));
            prep.notes.push(format!("rho: {rho}"));
            prep.bound = Some((rate_bound_proximal(mu, l, kappa, rho)?, "proximal"));
            let z = PointZ::new(x_star, y_star);
            prep.z_star = Some(z.stacked());
            prep.certificate = Some(cert_proximal(sur, &z)?);
            Ok(prep)
        }
        AlgorithmConfig::Preconditioned { space, eta, alpha } => {
            let (mu, l, kappa) = (meta.require_mu()?, meta.require_l()?, meta.require_kappa()?);
            let sigma = meta.require_sigma()?;
            let (eta, alpha) = match (eta, alpha) {
                (Some(e), Some(a)) => (*e, *a),
                (None, None) => precond_params_pick(mu, l, kappa)?,
                _ => return Err(CliError::Config("give both eta and alpha, or neither".into())),
            };
            let transform = qp.preconditioned(eta, alpha)?;
            // multipliers of the eta-weighted constraint term
            let y_eta = &y_star / eta;
            let mut prep = match space {
                Space::Uy => {
                    let mut p = Prepared::new(preconditioned_pd(transform.clone(), PrecondSpace::Uy)?);
                    p.z_star = Some(stack(&transform.to_u(&x_star, &y_eta), &y_eta));
                    p
                }
                Space::Xy => {
                    let mut p = Prepared::new(preconditioned_pd(transform, PrecondSpace::Xy)?);
                    p.z_star = Some(stack(&x_star, &y_eta));
                    p.envelope = Some((mu, precond_k(sigma, alpha)?));
                    p
                }
            };
            prep.notes.push(format!("eta: {eta}"));
            prep.notes.push(format!("alpha: {alpha}"));
            prep.bound = Some((rate_bound_precond(mu, l, kappa, eta, alpha)?, "preconditioned"));
            Ok(prep)
        }
        AlgorithmConfig::Reduced { inner_tol } => {
            let sqp = separable.ok_or_else(|| incompatible(cfg))?;
            let sep = sqp.separable;
            let n_s = sep.n_s();
            let mu_c = sep.f_c.mu().ok_or(saddleflow::Error::MissingConstant("mu_c"))?;
            let l_s = sep.f_s.l().ok_or(saddleflow::Error::MissingConstant("l_s"))?;
            let (kappa_s, _) = sep.gram_bounds();
            let reduced = reduce(sep, inner_config(*inner_tol))?;
            let mut prep = Prepared::new(reduced_pd(reduced));
            prep.z_star = Some(stack(&x_star.rows(n_s, x_star.len() - n_s).into_owned(), &y_star));
            prep.bound = Some((rate_bound_reduced(mu_c, l_s, kappa_s)?, "reduced"));
            Ok(prep)
        }
        _ => Err(incompatible(cfg)),
    }
}

/// Sparse ground truth with small noise; columns scaled by `1 / sqrt(m)`.
pub fn random_lasso_data(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (Matrix, Vector) {
    let a = gaussian_matrix(rng, m, n) / (m as f64).sqrt();
    let mut x_true = Vector::zeros(n);
    for j in 0..n.div_ceil(3) {
        x_true[j] = if j % 2 == 0 { 3.0 } else { -2.0 };
    }
    let noise = Vector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal) * 0.1);
    let b = &a * x_true + noise;
    (a, b)
}

fn build(cfg: &ExperimentConfig) -> Result<Prepared, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match &cfg.problem {
        ProblemConfig::Bilinear { matrix: mat, n, m } => {
            let mm = match (mat, n, m) {
                (Some(rows), _, _) => matrix("matrix", rows)?,
                (None, None, None) => Matrix::from_element(1, 1, 1.0),
                (None, n, m) => gaussian_matrix(&mut rng, n.unwrap_or(1), m.unwrap_or(1)),
            };
            saddle_family(make_bilinear(mm), cfg, None)
        }
        ProblemConfig::QuadraticSaddle { mu, q, n, m, b } => {
            let b = match b {
                Some(rows) => matrix("b", rows)?,
                None => {
                    let g = gaussian_matrix(&mut rng, *n, *m);
                    let s = spectral_norm(&g);
                    if s > 0.0 {
                        g / s
                    } else {
                        g
                    }
                }
            };
            saddle_family(make_quadratic_saddle(*mu, *q, b)?, cfg, Some((*mu, *q)))
        }
        ProblemConfig::Lp { c, a, b, a_eq, b_eq } => {
            let mut lp = LinearProgram::new(vector(c), matrix("a", a)?, vector(b))?;
            match (a_eq, b_eq) {
                (Some(ae), Some(be)) => lp = lp.with_equalities(matrix("a_eq", ae)?, vector(be))?,
                (None, None) => {}
                _ => return Err(CliError::Config("a_eq and b_eq must be given together".into())),
            }
            let lag = make_lp(&lp)?;
            lp_family(lag, lp, cfg)
        }
        ProblemConfig::MinCostFlow { file, network_seed } => {
            let net = match file {
                Some(path) => {
                    let path = cfg.resolve(path);
                    let text = fs::read_to_string(&path)
                        .map_err(|e| CliError::Config(format!("cannot read network {}: {e}", path.display())))?;
                    FlowNetwork::parse(&text)
                        .map_err(|e| CliError::Config(format!("network {}: {e}", path.display())))?
                }
                None => FlowNetwork::canonical(network_seed.unwrap_or(cfg.seed)),
            };
            let mcf = make_min_cost_flow(&net)?;
            let mut prep = lp_family(mcf.lagrangian.clone(), mcf.lp.clone(), cfg)?;
            prep.notes.push(format!("network: {} nodes, {} edges", net.node_ids.len(), net.edges.len()));
            Ok(prep)
        }
        ProblemConfig::QpAffine { q, p, a, b } => {
            let qp = make_qp_affine(matrix("q", q)?, vector(p), matrix("a", a)?, vector(b))?;
            qp_family(qp, None, cfg)
        }
        ProblemConfig::SeparableQp {
            q_s,
            p_s,
            q_c,
            p_c,
            a_s,
            a_c,
            b,
        } => {
            let sqp = make_separable_qp(
                matrix("q_s", q_s)?,
                vector(p_s),
                matrix("q_c", q_c)?,
                vector(p_c),
                matrix("a_s", a_s)?,
                matrix("a_c", a_c)?,
                vector(b),
            )?;
            qp_family(sqp.full.clone(), Some(sqp), cfg)
        }
        ProblemConfig::Lasso { lambda, a, b, n, m } => {
            let AlgorithmConfig::LassoPipeline { rho, alpha, inner_tol } = &cfg.algorithm else {
                return Err(incompatible(cfg));
            };
            let (ad, bd) = match (a, b) {
                (Some(a), Some(b)) => (matrix("a", a)?, vector(b)),
                (None, None) => random_lasso_data(&mut rng, *n, *m),
                _ => return Err(CliError::Config("lasso a and b must be given together".into())),
            };
            let problem = make_lasso(ad, bd, *lambda)?;
            let alpha = alpha.unwrap_or(1.0 / problem.l());
            let pipe = problem.pipeline(alpha, *rho, inner_config(*inner_tol))?;
            let x_oracle = lasso_oracle(&problem, 1e-12, 2_000_000, None)?;
            let (xs, ys) = problem.kkt_from_primal(&x_oracle)?;
            let mut prep = Prepared::new(pipe.flow.clone());
            prep.z_star = Some(pipe.equilibrium(&xs, &ys));
            prep.notes.push(format!("lambda: {lambda}"));
            prep.notes.push(format!("rho: {rho}"));
            prep.notes.push(format!("alpha: {alpha} (alpha * l = {:.4})", alpha * problem.l()));
            prep.post = Some(Box::new(move |z: &Vector| {
                let x_hat = pipe.x_hat(z);
                Ok(vec![
                    format!("objective: {:.10e}", problem.objective(&x_hat)),
                    format!("oracle_objective: {:.10e}", problem.objective(&x_oracle)),
                    format!("oracle_distance_inf: {:.3e}", (&x_hat - &x_oracle).amax()),
                    format!("optimality_residual: {:.3e}", problem.optimality_residual(&x_hat)),
                ])
            }));
            Ok(prep)
        }
    }
}

fn initial_state(cfg: &ExperimentConfig, dim: usize) -> Result<Vector, CliError> {
    match &cfg.initial {
        Some(v) if v.len() == dim => Ok(vector(v)),
        Some(v) => Err(CliError::Config(format!(
            "initial state has {} entries but the flow has dimension {dim}",
            v.len()
        ))),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(1);
            Ok(Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal)))
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

fn write_rates(path: &Path, traj: &Trajectory, residuals: &[f64], distances: Option<&[(f64, f64)]>) -> Result<(), CliError> {
    let mut out = String::from(if distances.is_some() { "t,residual,distance\n" } else { "t,residual\n" });
    for (k, t) in traj.times.iter().enumerate() {
        match distances {
            Some(d) => writeln!(out, "{t:.16e},{:.16e},{:.16e}", residuals[k], d[k].1),
            None => writeln!(out, "{t:.16e},{:.16e}", residuals[k]),
        }
        .expect("writing to a string");
    }
    fs::write(path, out).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Runs one experiment and writes `trajectory.csv`, `rates.csv` and
/// `report.txt` into `out_dir`.
pub fn run(cfg: &ExperimentConfig, name: &str, out_dir: &Path) -> Result<RunSummary, CliError> {
    let icfg = cfg.integrator.to_config()?;
    let start = Instant::now();
    let prep = build(cfg)?;
    let flow = &prep.flow;
    let z0 = initial_state(cfg, flow.dim())?;
    let traj = integrate(flow, &z0, &icfg)?;
    let residuals = traj
        .states
        .iter()
        .map(|z| flow.residual(z))
        .collect::<saddleflow::Result<Vec<f64>>>()?;
    let initial_residual = residuals[0];
    let final_residual = *residuals.last().expect("trajectory has samples");

    let (z_star, reference) = match &prep.z_star {
        Some(z) => (Some(z.clone()), "known"),
        None => match detect_equilibrium(flow, &traj, 1e-9) {
            Some(z) => (Some(z), "trajectory end point"),
            None => match reference_equilibrium(flow, &z0, &icfg, 1e-9)? {
                Some(z) => (Some(z), "extended run"),
                None => (None, "unavailable"),
            },
        },
    };

    let mut r = String::new();
    let w = &mut r;
    macro_rules! line {
        ($($arg:tt)*) => { writeln!(w, $($arg)*).expect("writing to a string") };
    }
    line!("config: {name}");
    line!("problem: {}", cfg.problem.name());
    line!("algorithm: {}", cfg.algorithm.name());
    line!("flow: {}", flow.label());
    line!("seed: {}", cfg.seed);
    line!("dimension: {}", flow.dim());
    line!(
        "integrator: {:?}, step {}, horizon {}, {} samples{}",
        icfg.method,
        icfg.step,
        icfg.horizon,
        traj.len(),
        if traj.clamped_start { ", start clamped onto the feasible set" } else { "" }
    );
    for note in &prep.notes {
        line!("{note}");
    }
    line!("initial_residual: {initial_residual:.6e}");
    line!("final_residual: {final_residual:.6e}");
    let convergence = if final_residual <= CONVERGED_TOL {
        "converged".to_string()
    } else if final_residual >= 0.5 * initial_residual {
        "not converging (residual not decreasing)".to_string()
    } else {
        format!("converging (residual above {CONVERGED_TOL:e} at the horizon)")
    };
    line!("convergence: {convergence}");
    line!("reference_point: {reference}");

    let bound = prep.bound.map(|b| b.0);
    match prep.bound {
        Some((c, kind)) => line!("rate_bound: {c:.6} ({kind})"),
        None => line!("rate_bound: none"),
    }
    let mut c_fit = None;
    let distances = match &z_star {
        Some(z) => Some(distance_series(&traj, z)?),
        None => None,
    };
    if let Some(series) = &distances {
        match fit_rate(series, None, DEFAULT_FLOOR, bound) {
            Ok(rep) => {
                c_fit = Some(rep.c_fit);
                line!(
                    "rate_fit: c_fit {:.6}, r2 {:.6}, window [{:.4}, {:.4}], {} samples",
                    rep.c_fit,
                    rep.r_squared,
                    rep.window.0,
                    rep.window.1,
                    rep.samples
                );
                line!("rate_verdict: {}", format!("{:?}", rep.verdict).to_lowercase());
            }
            Err(e) => {
                line!("rate_fit: unavailable ({e})");
                line!("rate_verdict: unavailable");
            }
        }
        if let Some((c, k)) = prep.envelope {
            let inside: Vec<(f64, f64)> = series.iter().take_while(|(_, d)| *d > 1e-10).copied().collect();
            let holds = envelope_check(&inside, c, k)?;
            line!("envelope: {} (c = {c}, K = {k})", if holds { "holds" } else { "violated" });
        }
        let lyap = lyapunov_series(&traj, z_star.as_ref().expect("distances imply a reference"))?;
        line!("lyapunov_max_increment: {:.3e}", lyap.max_increment);
    } else {
        line!("rate_fit: unavailable (no reference point)");
        line!("rate_verdict: unavailable");
    }

    match &prep.certificate {
        Some(cert) => {
            let rep = eval_certificate(cert, &traj, Some(flow))?;
            line!(
                "certificate: {}, min entry {:.3e}, bracket violation {:.3e}, sandwich {}, observability {}",
                cert.label(),
                rep.min_entry[0].min(rep.min_entry[1]),
                rep.max_bracket_violation,
                if rep.sandwich_holds() { "holds" } else { "fails" },
                match rep.observability {
                    Observability::NotFalsified => "not falsified",
                    Observability::Falsified => "falsified",
                    Observability::Unchecked => "unchecked",
                }
            );
        }
        None => line!("certificate: none"),
    }
    if let Some(post) = &prep.post {
        for l in post(traj.final_state().expect("trajectory has samples"))? {
            line!("{l}");
        }
    }
    let wall_time = start.elapsed().as_secs_f64();

    fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let traj_path = out_dir.join("trajectory.csv");
    fs::write(&traj_path, traj.to_csv()).map_err(|e| CliError::Io(format!("{}: {e}", traj_path.display())))?;
    write_rates(&out_dir.join("rates.csv"), &traj, &residuals, distances.as_deref())?;
    let report_path = out_dir.join("report.txt");
    fs::write(&report_path, &r).map_err(|e| CliError::Io(format!("{}: {e}", report_path.display())))?;

    Ok(RunSummary {
        name: name.to_string(),
        problem: cfg.problem.name().to_string(),
        algorithm: cfg.algorithm.name().to_string(),
        c_bound: bound,
        c_fit,
        wall_time,
        final_residual,
        report: r,
    })
}

pub const COMPARE_HEADER: &str = "config,problem,algorithm,c_bound,c_fit,wall_time,final_residual";

/// Runs every config concurrently; each writes into its own subdirectory of
/// `out_dir`, and the table goes to `out_dir/compare.csv`.
pub fn compare(configs: &[(String, ExperimentConfig)], out_dir: &Path) -> Result<Vec<RunSummary>, CliError> {
    if configs.is_empty() {
        return Err(CliError::Usage("compare needs at least one config".into()));
    }
    let dirs = member_dirs(configs, out_dir);
    let results: Vec<Result<RunSummary, CliError>> = configs
        .par_iter()
        .zip(dirs.par_iter())
        .map(|((name, cfg), dir)| run(cfg, name, dir))
        .collect();
    let summaries = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut table = format!("{COMPARE_HEADER}\n");
    for s in &summaries {
        writeln!(
            table,
            "{},{},{},{},{},{:.6},{:.6e}",
            s.name,
            s.problem,
            s.algorithm,
            fmt_opt(s.c_bound),
            fmt_opt(s.c_fit),
            s.wall_time,
            s.final_residual
        )
        .expect("writing to a string");
    }
    let path = out_dir.join("compare.csv");
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    fs::write(&path, table).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(summaries)
}

/// `out_dir/<name>`, suffixed with the position when names repeat.
fn member_dirs(configs: &[(String, ExperimentConfig)], out_dir: &Path) -> Vec<PathBuf> {
    configs
        .iter()
        .enumerate()
        .map(|(i, (name, _))| {
            let repeated = configs.iter().filter(|(n, _)| n == name).count() > 1;
            if repeated {
                out_dir.join(format!("{name}_{i}"))
            } else {
                out_dir.join(name)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(text, Path::new(".")).unwrap()
    }

    #[test]
    fn incompatible_pair_is_config_error() {
        let c = cfg("[problem]\nkind = \"bilinear\"\n[algorithm]\nkind = \"reduced\"\n");
        assert!(matches!(build(&c), Err(CliError::Config(_))));
        let c = cfg("[problem]\nkind = \"lasso\"\nlambda = 0.1\n[algorithm]\nkind = \"standard\"\n");
        assert!(matches!(build(&c), Err(CliError::Config(_))));
    }

    #[test]
    fn proximal_without_constants_needs_rho() {
        let c = cfg("[problem]\nkind = \"bilinear\"\n[algorithm]\nkind = \"proximal\"\n");
        assert!(matches!(build(&c), Err(CliError::Config(_))));
    }

    #[test]
    fn initial_state_is_seeded_and_checked() {
        let c = cfg("seed = 9\n[problem]\nkind = \"bilinear\"\n[algorithm]\nkind = \"standard\"\n");
        assert_eq!(initial_state(&c, 4).unwrap(), initial_state(&c, 4).unwrap());
        let c = cfg("initial = [1.0]\n[problem]\nkind = \"bilinear\"\n[algorithm]\nkind = \"standard\"\n");
        assert!(matches!(initial_state(&c, 2), Err(CliError::Config(_))));
    }

    #[test]
    fn default_bilinear_is_scalar() {
        let c = cfg("[problem]\nkind = \"bilinear\"\n[algorithm]\nkind = \"standard\"\n");
        let prep = build(&c).unwrap();
        assert_eq!(prep.flow.dim(), 2);
        assert_eq!(prep.z_star, Some(Vector::zeros(2)));
    }

    #[test]
    fn repeated_names_get_distinct_dirs() {
        let c = cfg("[problem]\nkind = \"bilinear\"\n[algorithm]\nkind = \"standard\"\n");
        let list = vec![("a".to_string(), c.clone()), ("a".to_string(), c.clone()), ("b".to_string(), c)];
        let dirs = member_dirs(&list, Path::new("out"));
        assert_eq!(dirs, vec![PathBuf::from("out/a_0"), PathBuf::from("out/a_1"), PathBuf::from("out/b")]);
    }
}
