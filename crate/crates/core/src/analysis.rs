//! Post-processing of trajectories: decay-rate fits, bound checks,
//! extinction detection and the asymptotic coefficient `alpha_infty`.

use serde::{Deserialize, Serialize};

use crate::domain::{gradient, inner_product, GridFunction, HeatEigenpair};
use crate::error::{HjError, Result};
use crate::solver::{hj_solve, HJProblem, SolverConfig, TimeStep, Trajectory};

/// Floor below which a sup-norm counts as zero for extinction.
pub const EXTINCTION_FLOOR: f64 = 1e-10;
pub const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub fitted_rate: f64,
    pub theoretical_rate: Option<f64>,
    pub relative_error: Option<f64>,
    pub fit_window: (f64, f64),
    /// RMS residual of the log-linear fit.
    pub fit_residual: f64,
    pub samples: usize,
}

impl DecayReport {
    pub fn with_theory(mut self, rate: f64) -> Self {
        self.theoretical_rate = Some(rate);
        self.relative_error = Some((self.fitted_rate - rate).abs() / rate.abs());
        self
    }
}

/// Least-squares slope of `log sup_norm` against `t` over the samples with
/// `t` strictly inside `window`.
pub fn fit_decay_rate(trajectory: &Trajectory, window: (f64, f64)) -> Result<DecayReport> {
    fit_series(&trajectory.times, &trajectory.sup_norms, window, 10.0 * trajectory.extinction_floor)
}

/// Default window `(1, t_end)`.
pub fn fit_decay_rate_default(trajectory: &Trajectory) -> Result<DecayReport> {
    fit_decay_rate(trajectory, (1.0, trajectory.final_time()))
}

/// Fit on arbitrary `(t, value)` samples; every value in the window must
/// exceed `min_value`.
pub fn fit_series(times: &[f64], values: &[f64], window: (f64, f64), min_value: f64) -> Result<DecayReport> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(HjError::InvalidParameter(format!("empty fit window ({lo}, {hi})")));
    }
    let mut pts = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t > lo && t < hi {
            if !(v > min_value) {
                return Err(HjError::InsufficientData(format!(
                    "sample {v:e} at t = {t} is at or below {min_value:e}; fit is meaningless near extinction"
                )));
            }
            pts.push((t, v.ln()));
        }
    }
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(HjError::InsufficientData(format!(
            "{} samples in ({lo}, {hi}); need at least {MIN_FIT_SAMPLES}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rms = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mt)).powi(2)).sum::<f64>() / n).sqrt();
    Ok(DecayReport {
        fitted_rate: -slope,
        theoretical_rate: None,
        relative_error: None,
        fit_window: window,
        fit_residual: rms,
        samples: pts.len(),
    })
}

/// `min_{t >= 1} e^{lambda1 t} ||u(t)||`, or `None` without samples at `t >= 1`.
pub fn lower_bound_check(trajectory: &Trajectory, lambda1: f64) -> Option<f64> {
    trajectory
        .times
        .iter()
        .zip(&trajectory.sup_norms)
        .filter(|(t, _)| **t >= 1.0)
        .map(|(t, s)| (lambda1 * t).exp() * s)
        .reduce(f64::min)
}

/// `max_{t > 0} ||u_x(t)|| / ((1 + t^{-1/2}) e^{-lambda1 t})`.
pub fn gradient_bound_check(trajectory: &Trajectory, lambda1: f64) -> f64 {
    gradient_ratio_until(trajectory, lambda1, f64::INFINITY)
}

/// As [`gradient_bound_check`] restricted to `t <= t_max`.
pub fn gradient_ratio_until(trajectory: &Trajectory, lambda1: f64, t_max: f64) -> f64 {
    trajectory
        .times
        .iter()
        .zip(&trajectory.grad_sup_norms)
        .filter(|(t, _)| **t > 0.0 && **t <= t_max)
        .map(|(t, g)| g / ((1.0 + t.powf(-0.5)) * (-lambda1 * t).exp()))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionReport {
    pub extinct: bool,
    pub t_star_estimate: Option<f64>,
    pub floor: f64,
}

/// `t_star` is the first recorded time after which every sample is at or
/// below `floor`; the run counts as extinct only if such a time exists.
pub fn detect_extinction(trajectory: &Trajectory, floor: f64) -> ExtinctionReport {
    let mut t_star = None;
    for (&t, &s) in trajectory.times.iter().zip(&trajectory.sup_norms).rev() {
        if s <= floor {
            t_star = Some(t);
        } else {
            break;
        }
    }
    ExtinctionReport { extinct: t_star.is_some(), t_star_estimate: t_star, floor }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionRefinement {
    pub coarse: ExtinctionReport,
    pub fine: ExtinctionReport,
    pub dt_coarse: f64,
    pub dt_fine: f64,
    /// `|t_fine - t_coarse| / t_fine`, when both runs went extinct.
    pub relative_change: Option<f64>,
    /// Both extinct and `relative_change <= tol`.
    pub stable: bool,
}

/// Solves at `dt` and `dt / 2`, recording every step, and compares the two
/// extinction times.
pub fn refine_extinction(
    problem: &HJProblem,
    config: &SolverConfig,
    dt: f64,
    floor: f64,
    tol: f64,
) -> Result<ExtinctionRefinement> {
    let run = |dt: f64| -> Result<ExtinctionReport> {
        let cfg = SolverConfig { dt: TimeStep::Fixed(dt), record_every: 1, extinction_floor: floor, ..config.clone() };
        Ok(detect_extinction(&hj_solve(problem, &cfg)?, floor))
    };
    let coarse = run(dt)?;
    let fine = run(0.5 * dt)?;
    let relative_change = match (coarse.t_star_estimate, fine.t_star_estimate) {
        (Some(c), Some(f)) if f > 0.0 => Some((c - f).abs() / f),
        (Some(c), Some(f)) if c == f => Some(0.0),
        _ => None,
    };
    let stable = coarse.extinct && fine.extinct && relative_change.is_some_and(|r| r <= tol);
    Ok(ExtinctionRefinement { coarse, fine, dt_coarse: dt, dt_fine: 0.5 * dt, relative_change, stable })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaInfty {
    pub value: f64,
    pub quadrature_points: usize,
    /// Bound on the dropped integral over `(T, infinity)`.
    pub tail_bound: f64,
    /// Empirical `K` in `||u_x(t)|| <= K (1 + t^{-1/2}) e^{-lambda1 t}`.
    pub k_empirical: f64,
    /// `(t, ||e^{lambda1 t} u(t) - alpha_infty e1||)` at each snapshot.
    pub convergence: Vec<(f64, f64)>,
}

/// `<u0, e1> + a int_0^T e^{lambda1 t} int |u_x|^p e1 dx dt` by the trapezoid
/// rule over the trajectory's snapshots, plus a bound on the rest.
pub fn alpha_infty(trajectory: &Trajectory, problem: &HJProblem, eig: &HeatEigenpair) -> Result<AlphaInfty> {
    let p = problem.p;
    if !(p > 1.0) {
        return Err(HjError::InvalidParameter(format!("alpha_infty needs p > 1, got {p}")));
    }
    let snaps = &trajectory.snapshots;
    if snaps.len() < 2 || snaps[0].0 != 0.0 {
        return Err(HjError::InsufficientData("alpha_infty needs snapshots starting at t = 0".into()));
    }
    let lambda1 = eig.lambda1;
    let mut samples = Vec::with_capacity(snaps.len());
    for (t, u) in snaps {
        let g = gradient(u)?.map(|v| v.abs().powf(p));
        samples.push((*t, (lambda1 * t).exp() * inner_product(&g, &eig.e1)?));
    }
    let integral: f64 = samples.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    let value = inner_product(&problem.u0, &eig.e1)? + problem.a * integral;

    let big_t = snaps.last().expect("checked above").0;
    let k = gradient_bound_check(trajectory, lambda1);
    let e1_mass = eig.e1.values().iter().fold(0.0, |s, v| s + v) * eig.e1.grid().dx();
    let tail_bound = if big_t > 0.0 {
        problem.a.abs() * k.powf(p) * (1.0 + big_t.powf(-0.5)).powf(p) * e1_mass * (-(p - 1.0) * lambda1 * big_t).exp()
            / ((p - 1.0) * lambda1)
    } else {
        f64::INFINITY
    };

    let convergence = snaps
        .iter()
        .map(|(t, u)| {
            let s = (lambda1 * t).exp();
            let d = u.zip_with(&eig.e1, |x, e| s * x - value * e)?;
            Ok((*t, d.sup_norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlphaInfty { value, quadrature_points: samples.len(), tail_bound, k_empirical: k, convergence })
}

/// Run parameters attached to every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub a: f64,
    pub p: f64,
    pub interval: (f64, f64),
    pub n_cells: usize,
    pub dt: TimeStep,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub steps: usize,
    pub version: String,
}

impl RunMetadata {
    pub fn new(problem: &HJProblem, config: &SolverConfig, trajectory: &Trajectory) -> Self {
        let g = problem.grid();
        Self {
            a: problem.a,
            p: problem.p,
            interval: (g.interval.left, g.interval.right),
            n_cells: g.n_cells,
            dt: config.dt,
            dt_min: trajectory.dt_min,
            dt_max: trajectory.dt_max,
            t_end: config.t_end,
            steps: trajectory.steps,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// A report together with the run that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub metadata: RunMetadata,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize> Report<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only plain data")
    }
}

/// Sup-norm distance, a small convenience for checks.
pub fn sup_distance(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    Ok(u.zip_with(v, |a, b| a - b)?.sup_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::InitialDatum;
    use crate::domain::{first_eigenpair, Grid1D, Interval};
    use std::f64::consts::PI;

    const L1: f64 = PI * PI / 4.0;

    fn heat_traj(c: f64, t_end: f64, n: usize) -> Trajectory {
        let times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
        let sup = times.iter().map(|t| c * (-L1 * t).exp()).collect();
        let grad = times.iter().map(|t| c * PI / 2.0 * (-L1 * t).exp()).collect();
        Trajectory::from_samples(times, sup, grad).unwrap()
    }

    #[test]
    fn heat_fit_calibration() {
        let tr = heat_traj(1.0, 4.0, 400);
        let r = fit_decay_rate_default(&tr).unwrap().with_theory(L1);
        assert!(r.relative_error.unwrap() * L1 < 1e-4);
        assert!(r.fit_residual < 1e-6);
        assert_eq!(r.fit_window, (1.0, 4.0));
        let scaled = fit_decay_rate_default(&heat_traj(37.0, 4.0, 400)).unwrap();
        assert!((scaled.fitted_rate - r.fitted_rate).abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        let tr = heat_traj(1.0, 4.0, 20);
        assert!(matches!(fit_decay_rate(&tr, (1.0, 1.5)), Err(HjError::InsufficientData(_))));
        let mut tr = heat_traj(1.0, 4.0, 400);
        tr.sup_norms[200] = 0.0;
        assert!(fit_decay_rate(&tr, (1.0, 4.0)).is_err());
        assert!(fit_decay_rate(&tr, (3.0, 2.0)).is_err());
    }

    #[test]
    fn heat_bounds() {
        let tr = heat_traj(1.0, 3.0, 300);
        let lb = lower_bound_check(&tr, L1).unwrap();
        assert!((lb - 1.0).abs() < 1e-12);
        let gr = gradient_bound_check(&tr, L1);
        assert!(gr <= PI / 2.0 && gr > 0.0);
        let zero = Trajectory::from_samples(vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(gradient_bound_check(&zero, L1), 0.0);
    }

    #[test]
    fn extinction_detection() {
        let tr = Trajectory::from_samples(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![1.0, 1e-11, 0.5, 0.0, 0.0], vec![0.0; 5])
            .unwrap();
        let r = detect_extinction(&tr, 1e-10);
        assert!(r.extinct);
        assert_eq!(r.t_star_estimate, Some(3.0));
        let alive = Trajectory::from_samples(vec![0.0, 1.0], vec![1.0, 1e-9], vec![0.0; 2]).unwrap();
        assert!(!detect_extinction(&alive, 1e-10).extinct);
        let dead = Trajectory::from_samples(vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0; 2]).unwrap();
        assert_eq!(detect_extinction(&dead, 1e-10).t_star_estimate, Some(0.0));
    }

    #[test]
    fn extinction_runs() {
        let g = Grid1D::new(Interval::symmetric(), 64).unwrap();
        let e1 = InitialDatum::E1.sample(g);
        let cfg = SolverConfig::default().with_t_end(3.0);
        let dt = crate::solver::auto_dt(-1.0, 0.5, g.dx(), 0.0);
        let pr = HJProblem::new(-1.0, 0.5, e1.clone()).unwrap();
        let r = refine_extinction(&pr, &cfg, dt, EXTINCTION_FLOOR, 0.05).unwrap();
        assert!(r.stable, "{r:?}");
        let pr = HJProblem::new(1.0, 0.5, e1).unwrap();
        let r = refine_extinction(&pr, &cfg, dt, EXTINCTION_FLOOR, 0.05).unwrap();
        assert!(!r.coarse.extinct && !r.fine.extinct && !r.stable);
    }

    fn alpha_run(a: f64, u0: GridFunction, t_end: f64) -> AlphaInfty {
        let g = *u0.grid();
        let pr = HJProblem::new(a, 1.5, u0).unwrap();
        let snaps: Vec<f64> = (0..=(t_end * 50.0) as usize).map(|i| i as f64 / 50.0).collect();
        let cfg = SolverConfig::default().with_t_end(t_end).with_snapshots(snaps).with_record_every(10);
        let tr = hj_solve(&pr, &cfg).unwrap();
        alpha_infty(&tr, &pr, &first_eigenpair(g).unwrap()).unwrap()
    }

    #[test]
    fn alpha_infty_cases() {
        let g = Grid1D::new(Interval::symmetric(), 64).unwrap();
        let e1 = InitialDatum::E1.sample(g);
        let small = alpha_run(1e-3, e1.clone(), 2.0);
        assert!((small.value - 1.0).abs() < 1e-2);
        let src = alpha_run(1.0, e1.clone(), 2.0);
        assert!(src.value > 1.0);
        assert!(src.tail_bound.is_finite());
        let c = &src.convergence;
        assert!(c.last().unwrap().1 < c[c.len() / 4].1);
        let zero = alpha_run(-1.0, GridFunction::zeros(g), 1.0);
        assert_eq!(zero.value, 0.0);
        let pr = HJProblem::new(1.0, 1.0, e1).unwrap();
        let tr = Trajectory::from_samples(vec![0.0], vec![1.0], vec![1.0]).unwrap();
        assert!(alpha_infty(&tr, &pr, &first_eigenpair(g).unwrap()).is_err());
    }

    #[test]
    fn report_json_has_metadata() {
        let g = Grid1D::new(Interval::symmetric(), 16).unwrap();
        let pr = HJProblem::new(-1.0, 2.0, InitialDatum::E1.sample(g)).unwrap();
        let cfg = SolverConfig::default().with_t_end(0.01);
        let tr = hj_solve(&pr, &cfg).unwrap();
        let rep = Report { metadata: RunMetadata::new(&pr, &cfg, &tr), body: detect_extinction(&tr, EXTINCTION_FLOOR) };
        let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(v["metadata"]["n_cells"], 16);
        assert_eq!(v["metadata"]["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(v["extinct"], false);
    }
}
