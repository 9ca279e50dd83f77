//! Fixed-step integration of flows, trajectory post-processing and
//! exponential rate fits.

use std::fmt::Write as _;
use std::io;

use crate::error::{check_dim, check_positive, Error, Result};
use crate::flows::Flow;
use crate::linalg::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub step: f64,
    pub horizon: f64,
    /// Steps between recorded samples.
    pub record_every: usize,
    /// Project each accepted state (and each RK4 stage state) onto the
    /// flow's feasible set.
    pub clamp: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            step: 1e-3,
            horizon: 10.0,
            record_every: 10,
            clamp: true,
        }
    }
}

impl IntegratorConfig {
    pub fn new(step: f64, horizon: f64) -> Self {
        Self {
            step,
            horizon,
            ..Self::default()
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn with_clamp(mut self, clamp: bool) -> Self {
        self.clamp = clamp;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("step", self.step)?;
        check_positive("horizon", self.horizon)?;
        if self.step >= self.horizon {
            return Err(Error::InvalidParameter {
                name: "step",
                reason: format!("step {} must be smaller than horizon {}", self.step, self.horizon),
            });
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter {
                name: "record_every",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// Number of steps; the last step lands on the horizon up to rounding.
    pub fn steps(&self) -> usize {
        let raw = self.horizon / self.step;
        let rounded = raw.round();
        if (raw - rounded).abs() < 1e-9 * raw.max(1.0) {
            rounded as usize
        } else {
            raw.ceil() as usize
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub flow_label: String,
    /// Set when the initial state had to be projected onto the feasible set.
    pub clamped_start: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.len())
    }

    pub fn final_state(&self) -> Option<&Vector> {
        self.states.last()
    }

    pub fn final_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from("t");
        for i in 0..self.dim() {
            let _ = write!(h, ",state_{i}");
        }
        h
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        for (t, z) in self.times.iter().zip(&self.states) {
            let mut row = format!("{t:.16e}");
            for v in z.iter() {
                let _ = write!(row, ",{v:.16e}");
            }
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

fn clamp_state(flow: &Flow, z: Vector, clamp: bool) -> Result<Vector> {
    match (clamp, flow.feasible()) {
        (true, Some(set)) => set.project_point(&z),
        _ => Ok(z),
    }
}

fn rk4_step(flow: &Flow, z: &Vector, h: f64, clamp: bool) -> Result<Vector> {
    let k1 = flow.eval(z)?;
    let z2 = clamp_state(flow, z + &k1 * (0.5 * h), clamp)?;
    let k2 = flow.eval(&z2)?;
    let z3 = clamp_state(flow, z + &k2 * (0.5 * h), clamp)?;
    let k3 = flow.eval(&z3)?;
    let z4 = clamp_state(flow, z + &k3 * h, clamp)?;
    let k4 = flow.eval(&z4)?;
    Ok(z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Integrates `flow` from `z0` with a fixed step, recording every
/// `record_every` steps plus the final state.
pub fn integrate(flow: &Flow, z0: &Vector, config: &IntegratorConfig) -> Result<Trajectory> {
    config.validate()?;
    check_dim("initial state", flow.dim(), z0.len())?;
    let mut clamped_start = false;
    let mut z = z0.clone();
    if let Some(set) = flow.feasible() {
        if !set.contains(&z, 0.0) {
            if !config.clamp {
                // fails with the offending coordinate unless within snap tolerance
                z = set.snap(&z)?;
            } else {
                z = set.project_point(&z)?;
            }
            clamped_start = true;
        }
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { time: 0.0 });
    }
    let n_steps = config.steps();
    let h = config.step;
    let mut times = vec![0.0];
    let mut states = vec![z.clone()];
    for k in 1..=n_steps {
        let t_prev = (k - 1) as f64 * h;
        let t = if k == n_steps { config.horizon } else { k as f64 * h };
        let dt = t - t_prev;
        let next = match config.method {
            Method::Rk4 => rk4_step(flow, &z, dt, config.clamp),
            Method::Euler => flow.eval(&z).map(|f| &z + f * dt),
        };
        let next = match next {
            Ok(v) if v.iter().all(|x| x.is_finite()) => v,
            Ok(_) => return Err(Error::NonFinite { time: t_prev }),
            Err(e) => return Err(e),
        };
        z = clamp_state(flow, next, config.clamp)?;
        if k % config.record_every == 0 || k == n_steps {
            times.push(t);
            states.push(z.clone());
        }
    }
    Ok(Trajectory {
        times,
        states,
        flow_label: flow.label().to_string(),
        clamped_start,
    })
}

/// The final state when the flow residual there is at most `tol`.
pub fn detect_equilibrium(flow: &Flow, traj: &Trajectory, tol: f64) -> Option<Vector> {
    let z = traj.final_state()?;
    match flow.residual(z) {
        Ok(r) if r <= tol => Some(z.clone()),
        _ => None,
    }
}

/// The equilibrium used for rate fits: the flow's hint when it has one,
/// otherwise the end point of a run ten times longer than `config` if that
/// run settles to residual `tol`.
pub fn reference_equilibrium(flow: &Flow, z0: &Vector, config: &IntegratorConfig, tol: f64) -> Result<Option<Vector>> {
    if let Some(z) = flow.equilibrium_hint() {
        return Ok(Some(z.clone()));
    }
    let long = IntegratorConfig {
        horizon: config.horizon * 10.0,
        record_every: usize::MAX,
        ..*config
    };
    let traj = integrate(flow, z0, &long)?;
    Ok(detect_equilibrium(flow, &traj, tol))
}

/// `(t_k, ||z(t_k) - z*||)`.
pub fn distance_series(traj: &Trajectory, z_star: &Vector) -> Result<Vec<(f64, f64)>> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, z)| {
            check_dim("equilibrium", z.len(), z_star.len())?;
            Ok((*t, (z - z_star).norm()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    NoBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub c_fit: f64,
    pub c_bound: Option<f64>,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
    pub verdict: Verdict,
}

pub const DEFAULT_FLOOR: f64 = 1e-12;

/// Default window: from the first sample with `d < d(0)/2` to the first
/// sample with `d <= max(100 floor, 1e-9 d(0))`. A series that never halves
/// is fitted over its whole length.
pub fn default_window(series: &[(f64, f64)], floor: f64) -> Option<(f64, f64)> {
    let (t0, d0) = *series.first()?;
    let t_end_all = series.last()?.0;
    let start = series.iter().find(|(_, d)| *d < 0.5 * d0).map(|p| p.0);
    let Some(start) = start else {
        return Some((t0, t_end_all));
    };
    let stop_level = (100.0 * floor).max(1e-9 * d0);
    let end = series
        .iter()
        .find(|(t, d)| *t >= start && *d <= stop_level)
        .map_or(t_end_all, |p| p.0);
    Some((start, end))
}

/// Least-squares fit of `ln d(t) ~ a - c t` over the window.
///
/// `c_fit` is the negated slope; with a bound the verdict passes when
/// `c_fit >= 0.9 c_bound`.
pub fn fit_rate(
    series: &[(f64, f64)],
    window: Option<(f64, f64)>,
    floor: f64,
    bound: Option<f64>,
) -> Result<RateReport> {
    const NEEDED: usize = 3;
    let window = match window.or_else(|| default_window(series, floor)) {
        Some(w) => w,
        None => return Err(Error::TooFewSamples { found: 0, needed: NEEDED }),
    };
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, d)| *t >= window.0 && *t <= window.1 && *d > floor && d.is_finite())
        .map(|(t, d)| (*t, d.ln()))
        .collect();
    if pts.len() < NEEDED {
        return Err(Error::TooFewSamples {
            found: pts.len(),
            needed: NEEDED,
        });
    }
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let stl: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let sll: f64 = pts.iter().map(|p| (p.1 - ml).powi(2)).sum();
    let slope = if stt > 0.0 { stl / stt } else { 0.0 };
    let r_squared = if sll > 0.0 && stt > 0.0 {
        (stl * stl / (stt * sll)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let c_fit = -slope;
    let verdict = match bound {
        Some(c) if c_fit >= 0.9 * c => Verdict::Pass,
        Some(_) => Verdict::Fail,
        None => Verdict::NoBound,
    };
    Ok(RateReport {
        c_fit,
        c_bound: bound,
        r_squared,
        window,
        samples: pts.len(),
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSeries {
    pub points: Vec<(f64, f64)>,
    /// Largest `V_{k+1} - V_k`, zero when the series never increases.
    pub max_increment: f64,
}

/// `V = 1/2 ||z - z*||^2` along the trajectory.
pub fn lyapunov_series(traj: &Trajectory, z_star: &Vector) -> Result<LyapunovSeries> {
    let points: Vec<(f64, f64)> = distance_series(traj, z_star)?
        .into_iter()
        .map(|(t, d)| (t, 0.5 * d * d))
        .collect();
    let max_increment = points.windows(2).map(|w| w[1].1 - w[0].1).fold(0.0, f64::max);
    Ok(LyapunovSeries { points, max_increment })
}

/// `d(t_k) <= K d(t_0) exp(-c (t_k - t_0)) (1 + 1e-6)` for every sample.
pub fn envelope_check(series: &[(f64, f64)], c: f64, k: f64) -> Result<bool> {
    check_positive("c", c)?;
    if k.is_nan() || k < 1.0 {
        return Err(Error::InvalidParameter {
            name: "K",
            reason: format!("must be at least 1, got {k}"),
        });
    }
    let Some(&(t0, d0)) = series.first() else {
        return Ok(true);
    };
    Ok(series
        .iter()
        .all(|(t, d)| *d <= k * d0 * (-c * (t - t0)).exp() * (1.0 + 1e-6)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::projected_flow;
    use crate::projection::FeasibleSet;

    fn decay() -> Flow {
        Flow::new(1, "decay", |z: &Vector| Ok(-z))
    }

    fn rotation() -> Flow {
        Flow::new(2, "rotation", |z: &Vector| Ok(Vector::from_vec(vec![-z[1], z[0]])))
    }

    fn exp_series(c: f64) -> Vec<(f64, f64)> {
        (0..200).map(|k| {
            let t = k as f64 * 0.05;
            (t, (-c * t).exp())
        })
        .collect()
    }

    #[test]
    fn scalar_decay_rk4() {
        let cfg = IntegratorConfig::new(0.01, 1.0).with_record_every(1);
        let traj = integrate(&decay(), &Vector::from_element(1, 1.0), &cfg).unwrap();
        assert_eq!(traj.len(), 101);
        assert!((traj.final_state().unwrap()[0] - (-1.0f64).exp()).abs() < 1e-9);
        let d = distance_series(&traj, &Vector::zeros(1)).unwrap();
        assert!(d.iter().all(|(t, d)| (d - (-t).exp()).abs() < 1e-9));
        let v = lyapunov_series(&traj, &Vector::zeros(1)).unwrap();
        assert!(v.points.iter().all(|(t, v)| (v - 0.5 * (-2.0 * t).exp()).abs() < 1e-9));
        assert_eq!(v.max_increment, 0.0);
    }

    #[test]
    fn rotation_returns_after_period() {
        let cfg = IntegratorConfig::new(1e-3, 2.0 * std::f64::consts::PI);
        let z0 = Vector::from_vec(vec![1.0, 0.0]);
        let traj = integrate(&rotation(), &z0, &cfg).unwrap();
        assert!((traj.final_state().unwrap() - &z0).norm() <= 1e-6);
        assert!((traj.final_time().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        let d = distance_series(&traj, &Vector::zeros(2)).unwrap();
        assert!(d.iter().all(|(_, d)| (d - 1.0).abs() <= 1e-6));
        assert!(detect_equilibrium(&rotation(), &traj, 1e-6).is_none());
    }

    #[test]
    fn outward_field_is_pinned() {
        let base = Flow::new(2, "push", |_: &Vector| Ok(Vector::from_vec(vec![1.0, -1.0])));
        let set = FeasibleSet::unbounded(1).product(&FeasibleSet::orthant(1));
        let flow = projected_flow(base, set).unwrap();
        let traj = integrate(&flow, &Vector::zeros(2), &IntegratorConfig::new(0.01, 1.0)).unwrap();
        assert!(traj.states.iter().all(|z| z[1] == 0.0));
        assert!(!traj.clamped_start);
    }

    #[test]
    fn start_outside_is_clamped_and_flagged() {
        let flow = projected_flow(decay(), FeasibleSet::orthant(1)).unwrap();
        let traj = integrate(&flow, &Vector::from_element(1, -1.0), &IntegratorConfig::new(0.01, 0.1)).unwrap();
        assert!(traj.clamped_start);
        assert_eq!(traj.states[0][0], 0.0);
    }

    #[test]
    fn blow_up_reports_last_finite_time() {
        let flow = Flow::new(1, "blowup", |z: &Vector| Ok(z.map(|v| v * v)));
        let err = integrate(&flow, &Vector::from_element(1, 1.0), &IntegratorConfig::new(0.01, 5.0)).unwrap_err();
        match err {
            Error::NonFinite { time } => assert!(time > 0.9 && time < 1.1, "{time}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn at_equilibrium_is_detected() {
        let traj = integrate(&decay(), &Vector::zeros(1), &IntegratorConfig::new(0.1, 1.0)).unwrap();
        assert_eq!(detect_equilibrium(&decay(), &traj, 1e-12), Some(Vector::zeros(1)));
    }

    #[test]
    fn csv_has_full_precision() {
        let traj = integrate(&decay(), &Vector::from_element(1, 1.0), &IntegratorConfig::new(0.5, 1.0).with_record_every(1)).unwrap();
        let csv = traj.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,state_0");
        assert_eq!(lines.len(), 4);
        let v: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, traj.states[2][0]);
    }

    #[test]
    fn fit_exact_exponential() {
        let r = fit_rate(&exp_series(2.0), None, DEFAULT_FLOOR, Some(2.0)).unwrap();
        assert!((r.c_fit - 2.0).abs() < 1e-6);
        assert!(r.r_squared > 1.0 - 1e-12);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn fit_constant_series() {
        let s: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 3.0)).collect();
        let r = fit_rate(&s, None, DEFAULT_FLOOR, None).unwrap();
        assert_eq!(r.c_fit, 0.0);
        assert_eq!(r.verdict, Verdict::NoBound);
    }

    #[test]
    fn fit_needs_samples() {
        let s = vec![(0.0, 1.0), (1.0, 0.1)];
        assert!(matches!(fit_rate(&s, None, DEFAULT_FLOOR, None), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn fit_verdict_fails_below_bound() {
        let r = fit_rate(&exp_series(0.5), None, DEFAULT_FLOOR, Some(1.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn envelope_examples() {
        assert!(envelope_check(&exp_series(1.0), 1.0, 1.0).unwrap());
        assert!(!envelope_check(&exp_series(0.5), 1.0, 1.0).unwrap());
        assert!(envelope_check(&exp_series(1.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::new(1.0, 0.5).validate().is_err());
        assert!(IntegratorConfig::new(0.1, 1.0).with_record_every(0).validate().is_err());
        assert_eq!(IntegratorConfig::new(0.1, 1.0).steps(), 10);
        assert_eq!(IntegratorConfig::new(0.3, 1.0).steps(), 4);
    }
}
