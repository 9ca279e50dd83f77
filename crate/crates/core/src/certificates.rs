//! Observable certificates evaluated along trajectories, plus closed-form
//! exponential rate bounds and parameter rules.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, check_positive, Error, Result};
use crate::flows::Flow;
use crate::integrate::Trajectory;
use crate::linalg::{split, Vector};
use crate::saddle::{stationarity_residual, PointZ, SaddleProblem};
use crate::transforms::{AugmentedProblem, ProximalSurrogate};

pub type CertFn = dyn Fn(&Vector) -> Result<[f64; 2]> + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertLabel {
    StrictCc,
    Proximal,
    Augmented,
    Custom,
}

impl fmt::Display for CertLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertLabel::StrictCc => "strict_cc",
            CertLabel::Proximal => "proximal",
            CertLabel::Augmented => "augmented",
            CertLabel::Custom => "custom",
        })
    }
}

/// A pair `h(z) >= 0` with an upper bracket `b(z) >= h(z)`.
#[derive(Clone)]
pub struct Certificate {
    dim: usize,
    eval: Arc<CertFn>,
    bracket: Arc<CertFn>,
    label: CertLabel,
}

impl fmt::Debug for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Certificate")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .finish()
    }
}

impl Certificate {
    pub fn custom<E, B>(dim: usize, eval: E, bracket: B) -> Self
    where
        E: Fn(&Vector) -> Result<[f64; 2]> + Send + Sync + 'static,
        B: Fn(&Vector) -> Result<[f64; 2]> + Send + Sync + 'static,
    {
        Self {
            dim,
            eval: Arc::new(eval),
            bracket: Arc::new(bracket),
            label: CertLabel::Custom,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> CertLabel {
        self.label
    }

    pub fn eval(&self, z: &Vector) -> Result<[f64; 2]> {
        check_dim("certificate state", self.dim, z.len())?;
        (self.eval)(z)
    }

    pub fn bracket(&self, z: &Vector) -> Result<[f64; 2]> {
        check_dim("certificate state", self.dim, z.len())?;
        (self.bracket)(z)
    }
}

/// `h = [S(z*) - S(x*, y); S(x, y*) - S(z*)]`, bracketed by itself.
pub fn cert_strict_cc<P: SaddleProblem + 'static>(problem: P, z_star: &PointZ) -> Result<Certificate> {
    let (n, m) = problem.dims();
    check_dim("x*", n, z_star.x.len())?;
    check_dim("y*", m, z_star.y.len())?;
    let residual = stationarity_residual(&problem, z_star, problem.domain().as_ref())?;
    if residual > 1e-8 {
        return Err(Error::NotSaddle { residual });
    }
    let s_star = problem.value(&z_star.x, &z_star.y)?;
    let (xs, ys) = (z_star.x.clone(), z_star.y.clone());
    let h: Arc<CertFn> = Arc::new(move |z: &Vector| {
        let (x, y) = split(z, n);
        Ok([s_star - problem.value(&xs, &y)?, problem.value(&x, &ys)? - s_star])
    });
    Ok(Certificate {
        dim: n + m,
        eval: h.clone(),
        bracket: h,
        label: CertLabel::StrictCc,
    })
}

/// Over `(u, y)`: `h = [S~(w*) - S~(u*, y); rho/2 ||x~(u, y*) - u||^2]` with
/// bracket `[same; S~(u, y*) - S~(w*)]`.
pub fn cert_proximal<P: SaddleProblem + 'static>(
    surrogate: ProximalSurrogate<P>,
    w_star: &PointZ,
) -> Result<Certificate> {
    let (n, m) = surrogate.dims();
    check_dim("u*", n, w_star.x.len())?;
    check_dim("y*", m, w_star.y.len())?;
    let sur = Arc::new(surrogate);
    let s_star = sur.value(&w_star.x, &w_star.y)?;
    let rho = sur.rho();
    let (us, ys) = (w_star.x.clone(), w_star.y.clone());
    let (s1, us1, ys1) = (sur.clone(), us.clone(), ys.clone());
    let eval = move |z: &Vector| -> Result<[f64; 2]> {
        let (u, y) = split(z, n);
        let first = s_star - s1.value(&us1, &y)?;
        let xt = s1.x_tilde(&u, &ys1)?;
        Ok([first, 0.5 * rho * (&xt - &u).norm_squared()])
    };
    let bracket = move |z: &Vector| -> Result<[f64; 2]> {
        let (u, y) = split(z, n);
        Ok([s_star - sur.value(&us, &y)?, sur.value(&u, &ys)? - s_star])
    };
    Ok(Certificate {
        dim: n + m,
        eval: Arc::new(eval),
        bracket: Arc::new(bracket),
        label: CertLabel::Proximal,
    })
}

/// Over `(x, x_hat, y, y_hat)`: `h = [rho/2 ||y - y_hat||^2; rho/2 ||x - x_hat||^2]`.
///
/// `h` depends only on `rho`; the bracket
/// `[S^(z*) - S^(x*, x_hat*, y, y_hat); S^(x, x_hat, y*, y_hat*) - S^(z*)]`
/// needs the augmented function and its saddle `z_star` (in augmented
/// coordinates).
pub fn cert_augmented<P: SaddleProblem + 'static>(aug: AugmentedProblem<P>, z_star: &PointZ) -> Result<Certificate> {
    let (n2, m2) = aug.dims();
    check_dim("augmented x*", n2, z_star.x.len())?;
    check_dim("augmented y*", m2, z_star.y.len())?;
    let (n, m) = (n2 / 2, m2 / 2);
    let rho = aug.rho();
    let s_star = aug.value(&z_star.x, &z_star.y)?;
    let (xs, ys) = (z_star.x.clone(), z_star.y.clone());
    let eval = move |z: &Vector| -> Result<[f64; 2]> {
        let x = z.rows(0, n);
        let xh = z.rows(n, n);
        let y = z.rows(2 * n, m);
        let yh = z.rows(2 * n + m, m);
        Ok([0.5 * rho * (y - yh).norm_squared(), 0.5 * rho * (x - xh).norm_squared()])
    };
    let bracket = move |z: &Vector| -> Result<[f64; 2]> {
        let (xa, ya) = split(z, n2);
        Ok([s_star - aug.value(&xs, &ya)?, aug.value(&xa, &ys)? - s_star])
    };
    Ok(Certificate {
        dim: n2 + m2,
        eval: Arc::new(eval),
        bracket: Arc::new(bracket),
        label: CertLabel::Augmented,
    })
}

/// Outcome of the observability test; a finite run can only falsify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observability {
    /// No evidence against observability (this is not a proof of it).
    NotFalsified,
    /// `h` vanished over the trajectory tail while the flow did not settle.
    Falsified,
    /// No flow supplied.
    Unchecked,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateReport {
    pub min_entry: [f64; 2],
    /// Largest `h_i - bracket_i` over samples and entries.
    pub max_bracket_violation: f64,
    pub final_values: [f64; 2],
    pub final_flow_residual: Option<f64>,
    pub observability: Observability,
}

impl CertificateReport {
    /// `h >= -1e-9` and `h <= bracket + 1e-9` at every sample.
    pub fn sandwich_holds(&self) -> bool {
        self.min_entry.iter().all(|v| *v >= -1e-9) && self.max_bracket_violation <= 1e-9
    }
}

const OBS_H_TOL: f64 = 1e-10;
const OBS_RESIDUAL_TOL: f64 = 1e-6;

/// Evaluates `cert` at every sample of `traj`. With `flow`, observability is
/// falsified when `h` stays below 1e-10 over the last quarter of samples
/// while the flow residual at the end exceeds 1e-6.
pub fn eval_certificate(cert: &Certificate, traj: &Trajectory, flow: Option<&Flow>) -> Result<CertificateReport> {
    if traj.is_empty() {
        return Err(Error::TooFewSamples { found: 0, needed: 1 });
    }
    let mut min_entry = [f64::INFINITY; 2];
    let mut max_violation = f64::NEG_INFINITY;
    let mut values = Vec::with_capacity(traj.len());
    for z in &traj.states {
        let h = cert.eval(z)?;
        let b = cert.bracket(z)?;
        for i in 0..2 {
            min_entry[i] = min_entry[i].min(h[i]);
            max_violation = max_violation.max(h[i] - b[i]);
        }
        values.push(h);
    }
    let final_values = *values.last().expect("nonempty");
    let final_flow_residual = match flow {
        Some(f) => Some(f.residual(traj.final_state().expect("nonempty"))?),
        None => None,
    };
    let observability = match final_flow_residual {
        None => Observability::Unchecked,
        Some(r) => {
            let tail = values.len() - (values.len() / 4).max(1);
            let h_vanishes = values[tail..].iter().all(|h| h[0].abs().max(h[1].abs()) <= OBS_H_TOL);
            if h_vanishes && r > OBS_RESIDUAL_TOL {
                Observability::Falsified
            } else {
                Observability::NotFalsified
            }
        }
    };
    Ok(CertificateReport {
        min_entry,
        max_bracket_violation: max_violation,
        final_values,
        final_flow_residual,
        observability,
    })
}

/// `min{mu, q}` for strongly convex-strongly concave problems.
pub fn rate_bound_strong(mu: f64, q: f64) -> Result<f64> {
    check_positive("mu", mu)?;
    check_positive("q", q)?;
    Ok(mu.min(q))
}

/// `min{mu rho/(mu + rho), kappa/(l + rho)}` for the proximal flow.
pub fn rate_bound_proximal(mu: f64, l: f64, kappa: f64, rho: f64) -> Result<f64> {
    check_positive("mu", mu)?;
    check_positive("l", l)?;
    check_positive("kappa", kappa)?;
    check_positive("rho", rho)?;
    if l < mu {
        return Err(Error::InconsistentMeta(format!("l = {l} is smaller than mu = {mu}")));
    }
    Ok((mu * rho / (mu + rho)).min(kappa / (l + rho)))
}

/// The `rho` balancing both terms of [`rate_bound_proximal`], found by
/// bisection, and the closed-form best rate `c*`.
pub fn optimal_rho(mu: f64, l: f64, kappa: f64) -> Result<(f64, f64)> {
    check_positive("mu", mu)?;
    check_positive("l", l)?;
    check_positive("kappa", kappa)?;
    let gap = |rho: f64| mu * rho / (mu + rho) - kappa / (l + rho);
    let mut lo = 1e-12;
    let mut hi = 1.0;
    while gap(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    if gap(lo) > 0.0 {
        // balance point below the bracket floor
        return Ok((lo, closed_form_c_star(mu, l, kappa)));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = if gap(lo).abs() <= gap(hi).abs() { lo } else { hi };
    Ok((rho, closed_form_c_star(mu, l, kappa)))
}

fn closed_form_c_star(mu: f64, l: f64, kappa: f64) -> f64 {
    let d = mu * l - kappa;
    2.0 * mu * kappa / ((d * d + 4.0 * mu * mu * kappa).sqrt() + mu * l + kappa)
}

/// `min{mu, (2 eta alpha - l alpha^2) kappa}`, valid when `2 eta > l alpha`.
pub fn rate_bound_precond(mu: f64, l: f64, kappa: f64, eta: f64, alpha: f64) -> Result<f64> {
    check_positive("mu", mu)?;
    check_positive("kappa", kappa)?;
    check_positive("eta", eta)?;
    check_positive("alpha", alpha)?;
    if l.is_nan() || l < 0.0 {
        return Err(Error::InvalidParameter {
            name: "l",
            reason: format!("must be nonnegative, got {l}"),
        });
    }
    if 2.0 * eta <= l * alpha {
        return Err(Error::ConditionViolated(format!(
            "2 eta > l alpha fails: 2 * {eta} <= {l} * {alpha}"
        )));
    }
    Ok(mu.min((2.0 * eta * alpha - l * alpha * alpha) * kappa))
}

/// `alpha = sqrt(mu / (l kappa))`, `eta = 1.1 * (l alpha + mu / (kappa alpha)) / 2`,
/// so that `2 eta > l alpha + mu / (kappa alpha)` holds strictly.
pub fn precond_params_pick(mu: f64, l: f64, kappa: f64) -> Result<(f64, f64)> {
    check_positive("mu", mu)?;
    check_positive("l", l)?;
    check_positive("kappa", kappa)?;
    let alpha = (mu / (l * kappa)).sqrt();
    let eta = 1.1 * 0.5 * (l * alpha + mu / (kappa * alpha));
    Ok((eta, alpha))
}

/// `K = max{2, 2 sigma alpha^2 + 1}`.
pub fn precond_k(sigma: f64, alpha: f64) -> Result<f64> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("must be nonnegative, got {sigma}"),
        });
    }
    check_positive("alpha", alpha)?;
    Ok(2.0f64.max(2.0 * sigma * alpha * alpha + 1.0))
}

/// `min{mu_c, kappa_s / l_s}`.
pub fn rate_bound_reduced(mu_c: f64, l_s: f64, kappa_s: f64) -> Result<f64> {
    check_positive("mu_c", mu_c)?;
    check_positive("l_s", l_s)?;
    check_positive("kappa_s", kappa_s)?;
    Ok(mu_c.min(kappa_s / l_s))
}

/// `min{mu rho/(mu + rho), kappa/(l + rho + m zeta gamma)}`, where `zeta`
/// bounds `||y(t)||` and `gamma` the constraint curvature along the run.
#[allow(clippy::too_many_arguments)]
pub fn rate_bound_semiglobal(mu: f64, l: f64, kappa: f64, rho: f64, m: usize, zeta: f64, gamma: f64) -> Result<f64> {
    check_positive("mu", mu)?;
    check_positive("l", l)?;
    check_positive("kappa", kappa)?;
    check_positive("rho", rho)?;
    for (name, v) in [("zeta", zeta), ("gamma", gamma)] {
        if v.is_nan() || v < 0.0 {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("must be nonnegative, got {v}"),
            });
        }
    }
    Ok((mu * rho / (mu + rho)).min(kappa / (l + rho + m as f64 * zeta * gamma)))
}

/// `max_t ||y(t)||` where `y` occupies `len` coordinates from `start`.
pub fn measure_zeta(traj: &Trajectory, start: usize, len: usize) -> Result<f64> {
    let mut zeta: f64 = 0.0;
    for z in &traj.states {
        if start + len > z.len() {
            return Err(Error::DimensionMismatch {
                block: "dual block",
                expected: start + len,
                found: z.len(),
            });
        }
        zeta = zeta.max(z.rows(start, len).norm());
    }
    Ok(zeta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, IntegratorConfig};
    use crate::saddle::FnSaddle;
    use crate::transforms::{augment, proximal_surrogate, InnerSolveConfig};

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    /// `S = x^2/2 - y^2/2`.
    fn split_quadratic() -> FnSaddle {
        FnSaddle::new(
            1,
            1,
            |x: &Vector, y: &Vector| 0.5 * x[0] * x[0] - 0.5 * y[0] * y[0],
            |x: &Vector, y: &Vector| (x.clone(), -y),
        )
    }

    /// `S = x^2/2 + y x`.
    fn coupled() -> FnSaddle {
        FnSaddle::new(
            1,
            1,
            |x: &Vector, y: &Vector| 0.5 * x[0] * x[0] + y[0] * x[0],
            |x: &Vector, y: &Vector| (x + y, x.clone()),
        )
    }

    #[test]
    fn strict_cc_examples() {
        let c = cert_strict_cc(split_quadratic(), &PointZ::from_slices(&[0.0], &[0.0])).unwrap();
        assert_eq!(c.eval(&v(&[0.0, 0.0])).unwrap(), [0.0, 0.0]);
        assert_eq!(c.eval(&v(&[1.0, 0.0])).unwrap(), [0.0, 0.5]);
        assert_eq!(c.eval(&v(&[0.0, 2.0])).unwrap(), [2.0, 0.0]);
        assert_eq!(c.bracket(&v(&[0.0, 2.0])).unwrap(), [2.0, 0.0]);
        assert!(matches!(
            cert_strict_cc(split_quadratic(), &PointZ::from_slices(&[1.0], &[0.0])),
            Err(Error::NotSaddle { .. })
        ));
    }

    #[test]
    fn proximal_examples() {
        let sur = proximal_surrogate(coupled(), 1.0, InnerSolveConfig::default()).unwrap();
        let c = cert_proximal(sur, &PointZ::from_slices(&[0.0], &[0.0])).unwrap();
        let h = c.eval(&v(&[0.0, 0.0])).unwrap();
        assert!(h[0].abs() < 1e-14 && h[1].abs() < 1e-14);
        let h = c.eval(&v(&[1.0, 0.0])).unwrap();
        assert!((h[1] - 0.125).abs() < 1e-12);
        let b = c.bracket(&v(&[1.0, 0.0])).unwrap();
        assert!((b[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn augmented_examples() {
        let aug = augment(coupled(), 2.0).unwrap();
        let z_star = aug.lift(&PointZ::from_slices(&[0.0], &[0.0]));
        let c = cert_augmented(aug, &z_star).unwrap();
        assert_eq!(c.eval(&v(&[1.0, 1.0, -2.0, -2.0])).unwrap(), [0.0, 0.0]);
        assert_eq!(c.eval(&v(&[1.0, 0.0, 0.0, 0.0])).unwrap(), [0.0, 1.0]);
        let aug = augment(
            FnSaddle::new(
                2,
                2,
                |_: &Vector, _: &Vector| 0.0,
                |x: &Vector, y: &Vector| (x * 0.0, y * 0.0),
            ),
            1.0,
        )
        .unwrap();
        let c = cert_augmented(aug, &PointZ::new(Vector::zeros(4), Vector::zeros(4))).unwrap();
        assert_eq!(c.eval(&v(&[0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0])).unwrap()[0], 1.0);
    }

    #[test]
    fn pinned_trajectory_reports_zeros() {
        let problem = split_quadratic();
        let flow = crate::flows::standard_flow(split_quadratic());
        let c = cert_strict_cc(problem, &PointZ::from_slices(&[0.0], &[0.0])).unwrap();
        let traj = integrate(&flow, &v(&[0.0, 0.0]), &IntegratorConfig::new(0.1, 1.0)).unwrap();
        let r = eval_certificate(&c, &traj, Some(&flow)).unwrap();
        assert_eq!(r.final_values, [0.0, 0.0]);
        assert_eq!(r.min_entry, [0.0, 0.0]);
        assert!(r.sandwich_holds());
        assert_eq!(r.observability, Observability::NotFalsified);
    }

    #[test]
    fn vanishing_h_off_equilibrium_is_falsified() {
        let c = Certificate::custom(1, |_: &Vector| Ok([0.0, 0.0]), |_: &Vector| Ok([0.0, 0.0]));
        let flow = Flow::new(1, "drift", |_: &Vector| Ok(v(&[1.0])));
        let traj = integrate(&flow, &v(&[0.0]), &IntegratorConfig::new(0.1, 1.0)).unwrap();
        let r = eval_certificate(&c, &traj, Some(&flow)).unwrap();
        assert_eq!(r.observability, Observability::Falsified);
        assert_eq!(eval_certificate(&c, &traj, None).unwrap().observability, Observability::Unchecked);
    }

    #[test]
    fn strong_and_reduced_bounds() {
        assert_eq!(rate_bound_strong(1.0, 2.0).unwrap(), 1.0);
        assert_eq!(rate_bound_strong(3.0, 3.0).unwrap(), 3.0);
        assert_eq!(rate_bound_strong(0.5, 10.0).unwrap(), 0.5);
        assert!(rate_bound_strong(0.0, 1.0).is_err());
        assert_eq!(rate_bound_reduced(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(rate_bound_reduced(0.5, 2.0, 1.0).unwrap(), 0.5);
        assert_eq!(rate_bound_reduced(3.0, 1.0, 2.0).unwrap(), 2.0);
    }

    #[test]
    fn proximal_bound_examples() {
        assert_eq!(rate_bound_proximal(1.0, 1.0, 1.0, 1.0).unwrap(), 0.5);
        assert!((rate_bound_proximal(1.0, 4.0, 1.0, 1.0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(rate_bound_proximal(2.0, 2.0, 8.0, 2.0).unwrap(), 1.0);
        assert!(matches!(rate_bound_proximal(2.0, 1.0, 1.0, 1.0), Err(Error::InconsistentMeta(_))));
    }

    #[test]
    fn optimal_rho_examples() {
        let (rho, c) = optimal_rho(1.0, 1.0, 1.0).unwrap();
        assert!((rho - 1.0).abs() < 1e-10);
        assert!((c - 0.5).abs() < 1e-12);
        let (rho, c) = optimal_rho(1.0, 4.0, 1.0).unwrap();
        assert!((rho - (13.0f64.sqrt() - 3.0) / 2.0).abs() < 1e-10);
        assert!((c - 0.232408).abs() < 1e-6);
        assert!((rho / (1.0 + rho) - c).abs() < 1e-8);
    }

    #[test]
    fn precond_examples() {
        assert_eq!(rate_bound_precond(1.0, 1.0, 1.0, 1.5, 1.0).unwrap(), 1.0);
        assert!((rate_bound_precond(1.0, 1.0, 1.0, 0.6, 1.0).unwrap() - 0.2).abs() < 1e-12);
        assert!(matches!(
            rate_bound_precond(1.0, 1.0, 1.0, 0.4, 1.0),
            Err(Error::ConditionViolated(_))
        ));
        let (eta, alpha) = precond_params_pick(1.0, 1.0, 1.0).unwrap();
        assert_eq!(alpha, 1.0);
        assert!((eta - 1.1).abs() < 1e-15);
        let (eta, alpha) = precond_params_pick(4.0, 1.0, 1.0).unwrap();
        assert_eq!(alpha, 2.0);
        assert!((eta - 2.2).abs() < 1e-12);
        assert_eq!(rate_bound_precond(4.0, 1.0, 1.0, eta, alpha).unwrap(), 4.0);
        assert_eq!(precond_k(1.0, 1.0).unwrap(), 3.0);
        assert_eq!(precond_k(0.1, 1.0).unwrap(), 2.0);
        assert_eq!(precond_k(2.0, 0.5).unwrap(), 2.0);
    }

    #[test]
    fn semiglobal_examples() {
        let c = rate_bound_semiglobal(1.0, 1.0, 1.0, 1.0, 1, 1.0, 1.0).unwrap();
        assert!((c - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            rate_bound_semiglobal(1.0, 4.0, 1.0, 1.0, 3, 5.0, 0.0).unwrap(),
            rate_bound_proximal(1.0, 4.0, 1.0, 1.0).unwrap()
        );
    }

    #[test]
    fn zeta_is_max_dual_norm() {
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![v(&[9.0, 3.0, 4.0]), v(&[9.0, 0.0, 1.0])],
            flow_label: "t".into(),
            clamped_start: false,
        };
        assert_eq!(measure_zeta(&traj, 1, 2).unwrap(), 5.0);
        assert!(measure_zeta(&traj, 2, 2).is_err());
    }
}
