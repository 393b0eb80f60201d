//! IMEX finite differences for `u_t - u_xx = a |u_x|^p` with homogeneous
//! Dirichlet data.
//!
//! Each step applies an explicit monotone (Godunov-type) update for the
//! gradient term and then a backward-Euler diffusion solve. The gradient
//! update uses the upwind magnitude
//!
//! * `a < 0`: `|Du|_i = max(D-u_i, -D+u_i, 0) = (u_i - min(u_{i-1}, u_{i+1}))^+ / dx`
//! * `a > 0`: `|Du|_i = max(-D-u_i, D+u_i, 0) = (max(u_{i-1}, u_{i+1}) - u_i)^+ / dx`
//!
//! For `p < 1` the updated value is clipped to the neighbour it moves
//! towards, so a node never crosses its lowest (absorption) or highest
//! (source) neighbour in one step. This keeps the update monotone where the
//! Hamiltonian is not Lipschitz, without regularizing `|Du|^p`. For `p >= 1`
//! the same clip would be inactive under the CFL bound and is not applied.

use serde::{Deserialize, Serialize};

use crate::domain::{gradient, sup_norm, Grid1D, GridFunction, Interval};
use crate::error::{HjError, Result};
use crate::heat::{HeatSeries, DEFAULT_HEAT_MODES};
use crate::tridiag::Tridiagonal;

/// Consecutive sub-floor records after which a run counts as extinct.
pub const EXTINCTION_RUN: usize = 100;

const CFL_SAFETY: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct HJProblem {
    pub a: f64,
    pub p: f64,
    pub u0: GridFunction,
}

impl HJProblem {
    pub fn new(a: f64, p: f64, u0: GridFunction) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(HjError::InvalidParameter(format!("a must be finite and nonzero, got {a}")));
        }
        if !(p > 0.0) || !p.is_finite() {
            return Err(HjError::InvalidParameter(format!("p must be > 0, got {p}")));
        }
        if !u0.is_dirichlet() {
            return Err(HjError::NotDirichlet);
        }
        if u0.grid().n_cells < 2 {
            return Err(HjError::TooFewCells { min: 2, got: u0.grid().n_cells });
        }
        Ok(Self { a, p, u0 })
    }

    pub fn interval(&self) -> Interval {
        self.u0.grid().interval
    }

    pub fn grid(&self) -> Grid1D {
        *self.u0.grid()
    }

    pub fn regime(&self) -> Regime {
        if self.p < 1.0 {
            Regime::Extinction
        } else if self.p == 1.0 {
            Regime::Spectral
        } else if self.p <= 2.0 {
            Regime::HeatRate
        } else {
            Regime::Envelope
        }
    }

    /// Caveats the caller should surface alongside results.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.p > 2.0 && self.a > 0.0 {
            w.push(
                "p > 2 with a > 0: global existence needs small C1 data; \
                 gradient blow-up surfaces as a non-finite error"
                    .to_string(),
            );
        }
        if self.p < 1.0 && self.a > 0.0 {
            w.push("p < 1 with a > 0: solutions do not go extinct".to_string());
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Extinction,
    Spectral,
    HeatRate,
    Envelope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeStep {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: TimeStep,
    pub t_end: f64,
    /// Steps between trajectory samples.
    pub record_every: usize,
    pub extinction_floor: f64,
    /// Times at which full fields are kept; the march lands on each exactly.
    pub snapshot_times: Vec<f64>,
    /// Stop once the run has been below the floor for [`EXTINCTION_RUN`] records.
    pub stop_on_extinction: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: TimeStep::Auto,
            t_end: 1.0,
            record_every: 100,
            extinction_floor: 1e-12,
            snapshot_times: Vec::new(),
            stop_on_extinction: true,
        }
    }
}

impl SolverConfig {
    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn with_dt(mut self, dt: TimeStep) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_record_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(HjError::InvalidParameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(HjError::InvalidParameter("record_every must be >= 1".into()));
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(HjError::InvalidParameter(format!("dt must be positive, got {dt}")));
            }
        }
        if !(self.extinction_floor >= 0.0) {
            return Err(HjError::InvalidParameter("extinction_floor must be >= 0".into()));
        }
        if self.snapshot_times.iter().any(|&t| !(t >= 0.0) || t > self.t_end) {
            return Err(HjError::InvalidParameter("snapshot times must lie in [0, t_end]".into()));
        }
        Ok(())
    }
}

/// Norm history of a run plus the requested snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub sup_norms: Vec<f64>,
    pub grad_sup_norms: Vec<f64>,
    /// `(time, field)` pairs in increasing time order.
    pub snapshots: Vec<(f64, GridFunction)>,
    pub extinction_floor: f64,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn snapshot_at(&self, t: f64) -> Option<&GridFunction> {
        self.snapshots.iter().find(|(s, _)| (s - t).abs() <= 1e-12 * t.abs().max(1.0)).map(|(_, f)| f)
    }

    /// Builds a norm-only trajectory from sampled values (no snapshots).
    pub fn from_samples(times: Vec<f64>, sup_norms: Vec<f64>, grad_sup_norms: Vec<f64>) -> Result<Self> {
        if times.len() != sup_norms.len() || times.len() != grad_sup_norms.len() {
            return Err(HjError::LengthMismatch { expected: times.len(), got: sup_norms.len() });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(HjError::InvalidParameter("times must be strictly increasing".into()));
        }
        Ok(Self {
            times,
            sup_norms,
            grad_sup_norms,
            snapshots: Vec::new(),
            extinction_floor: 0.0,
            steps: 0,
            dt_min: 0.0,
            dt_max: 0.0,
        })
    }

    /// `t,sup_norm,grad_sup_norm` rows, 17 significant digits.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let mut s = String::from("t,sup_norm,grad_sup_norm\n");
        for i in 0..self.times.len() {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", self.times[i], self.sup_norms[i], self.grad_sup_norms[i]);
        }
        s
    }
}

#[derive(Debug, Clone, Copy)]
enum Power {
    One,
    Two,
    Three,
    Half,
    ThreeHalves,
    General(f64),
}

impl Power {
    fn new(p: f64) -> Self {
        match p {
            1.0 => Self::One,
            2.0 => Self::Two,
            3.0 => Self::Three,
            0.5 => Self::Half,
            1.5 => Self::ThreeHalves,
            x => Self::General(x),
        }
    }

    #[inline]
    fn apply(self, g: f64) -> f64 {
        match self {
            Self::One => g,
            Self::Two => g * g,
            Self::Three => g * g * g,
            Self::Half => g.sqrt(),
            Self::ThreeHalves => g * g.sqrt(),
            Self::General(p) => g.powf(p),
        }
    }
}

/// Explicit monotone update of the gradient term. Writes interior values of
/// `out` and returns the largest upwind gradient magnitude seen.
fn explicit_update(u: &[f64], a: f64, power: Power, dt: f64, dx: f64, out: &mut [f64]) -> f64 {
    let n = u.len() - 1;
    let clip = matches!(power, Power::Half) || matches!(power, Power::General(p) if p < 1.0);
    let c = dt * a.abs();
    let mut gmax = 0.0f64;
    out[0] = 0.0;
    out[n] = 0.0;
    if a < 0.0 {
        for i in 1..n {
            let ui = u[i];
            let m = u[i - 1].min(u[i + 1]);
            let s = ui - m;
            out[i] = if s > 0.0 {
                let g = s / dx;
                gmax = gmax.max(g);
                let v = ui - c * power.apply(g);
                if clip {
                    v.max(m)
                } else {
                    v
                }
            } else {
                ui
            };
        }
    } else {
        for i in 1..n {
            let ui = u[i];
            let m = u[i - 1].max(u[i + 1]);
            let s = m - ui;
            out[i] = if s > 0.0 {
                let g = s / dx;
                gmax = gmax.max(g);
                let v = ui + c * power.apply(g);
                if clip {
                    v.min(m)
                } else {
                    v
                }
            } else {
                ui
            };
        }
    }
    gmax
}

/// Largest upwind gradient magnitude the explicit update would use.
fn upwind_gradient_max(u: &[f64], a: f64, dx: f64) -> f64 {
    let n = u.len() - 1;
    let mut g = 0.0f64;
    for i in 1..n {
        let s = if a < 0.0 { u[i] - u[i - 1].min(u[i + 1]) } else { u[i - 1].max(u[i + 1]) - u[i] };
        g = g.max(s);
    }
    g.max(0.0) / dx
}

/// Auto time step `min(dx^2/4, 0.5 dx / (|a| max(1, G^{p-1})))`.
///
/// For `p <= 1` the gradient factor is dropped: `G^{p-1}` grows without
/// bound as the solution flattens, and the clipped update is monotone
/// without it.
pub fn auto_dt(a: f64, p: f64, dx: f64, gradient_estimate: f64) -> f64 {
    let factor = if p > 1.0 { gradient_estimate.powf(p - 1.0).max(1.0) } else { 1.0 };
    (dx * dx / 4.0).min(CFL_SAFETY * dx / (a.abs() * factor))
}

/// Coefficient of the implicit diffusion solve. For `p = 1` the upwind
/// update carries numerical diffusion `|a| dx / 2`, which is removed here so
/// the scheme is second order in space where `u` is monotone. The
/// coefficient stays positive, so the step remains monotone.
pub fn diffusion_coefficient(problem: &HJProblem) -> f64 {
    let dx = problem.grid().dx();
    if problem.p == 1.0 && problem.a.abs() * dx < 1.0 {
        1.0 - 0.5 * problem.a.abs() * dx
    } else {
        1.0
    }
}

struct Stepper {
    a: f64,
    power: Power,
    dx: f64,
    diffusion: f64,
    n: usize,
    cached: Option<(f64, Tridiagonal)>,
    work: Vec<f64>,
}

impl Stepper {
    fn new(problem: &HJProblem) -> Self {
        let n = problem.grid().n_cells;
        Self {
            a: problem.a,
            power: Power::new(problem.p),
            dx: problem.grid().dx(),
            diffusion: diffusion_coefficient(problem),
            n,
            cached: None,
            work: vec![0.0; n + 1],
        }
    }

    /// Advances `u` in place; returns the upwind gradient max of the input.
    fn step(&mut self, u: &mut [f64], dt: f64) -> f64 {
        let gmax = explicit_update(u, self.a, self.power, dt, self.dx, &mut self.work);
        let stale = match &self.cached {
            Some((d, _)) => *d != dt,
            None => true,
        };
        if stale {
            let r = self.diffusion * dt / (self.dx * self.dx);
            self.cached = Some((dt, Tridiagonal::new(self.n - 1, 1.0 + 2.0 * r, -r)));
        }
        let solver = &self.cached.as_ref().expect("factorization cached above").1;
        solver.solve(&mut self.work[1..self.n]);
        u.copy_from_slice(&self.work);
        gmax
    }
}

/// One IMEX step of size `dt`.
pub fn hj_step(u: &GridFunction, problem: &HJProblem, dt: f64) -> Result<GridFunction> {
    if u.grid() != problem.u0.grid() {
        return Err(HjError::GridMismatch);
    }
    if !(dt > 0.0) {
        return Err(HjError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let mut stepper = Stepper::new(problem);
    let mut out = u.clone();
    stepper.step(out.values_mut(), dt);
    if out.values().iter().any(|v| !v.is_finite()) {
        return Err(HjError::NonFinite { step: 1, time: dt });
    }
    Ok(out)
}

/// Marches to `t_end` (or to extinction) recording norms.
pub fn hj_solve(problem: &HJProblem, config: &SolverConfig) -> Result<Trajectory> {
    hj_solve_with(problem, config, |_, _| {})
}

/// As [`hj_solve`], calling `observer(t, u)` at every recorded sample.
pub fn hj_solve_with(
    problem: &HJProblem,
    config: &SolverConfig,
    mut observer: impl FnMut(f64, &GridFunction),
) -> Result<Trajectory> {
    config.validate()?;
    let dx = problem.grid().dx();
    let mut u = problem.u0.clone();
    let mut stepper = Stepper::new(problem);

    let mut targets: Vec<f64> = config.snapshot_times.iter().copied().filter(|&t| t > 0.0).collect();
    targets.push(config.t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    let wants_snapshot = |t: f64| config.snapshot_times.contains(&t);

    let mut traj = Trajectory {
        times: Vec::new(),
        sup_norms: Vec::new(),
        grad_sup_norms: Vec::new(),
        snapshots: Vec::new(),
        extinction_floor: config.extinction_floor,
        steps: 0,
        dt_min: f64::INFINITY,
        dt_max: 0.0,
    };
    let mut below_floor = 0usize;
    let mut record = |traj: &mut Trajectory, t: f64, u: &GridFunction| -> Result<bool> {
        let s = sup_norm(u);
        traj.times.push(t);
        traj.sup_norms.push(s);
        traj.grad_sup_norms.push(sup_norm(&gradient(u)?));
        observer(t, u);
        if s <= config.extinction_floor {
            below_floor += 1;
        } else {
            below_floor = 0;
        }
        Ok(config.stop_on_extinction && below_floor >= EXTINCTION_RUN)
    };

    if wants_snapshot(0.0) {
        traj.snapshots.push((0.0, u.clone()));
    }
    record(&mut traj, 0.0, &u)?;

    let mut t = 0.0;
    let mut gmax = upwind_gradient_max(u.values(), problem.a, dx);
    let mut target_idx = 0;
    let mut step = 0usize;
    while target_idx < targets.len() {
        let target = targets[target_idx];
        let mut dt = match config.dt {
            TimeStep::Auto => auto_dt(problem.a, problem.p, dx, gmax),
            TimeStep::Fixed(d) => d,
        };
        let landing = t + dt >= target - 1e-9 * dt;
        if landing {
            dt = target - t;
        }
        if dt > 0.0 {
            gmax = stepper.step(u.values_mut(), dt);
            step += 1;
            traj.dt_min = traj.dt_min.min(dt);
            traj.dt_max = traj.dt_max.max(dt);
        }
        t = if landing { target } else { t + dt };
        if !u.values().iter().all(|v| v.is_finite()) {
            return Err(HjError::NonFinite { step, time: t });
        }
        if landing {
            target_idx += 1;
            if wants_snapshot(t) {
                traj.snapshots.push((t, u.clone()));
            }
        }
        if landing || step.is_multiple_of(config.record_every) {
            let done = record(&mut traj, t, &u)?;
            if done {
                break;
            }
        }
    }
    traj.steps = step;
    if traj.dt_min == f64::INFINITY {
        traj.dt_min = 0.0;
    }
    Ok(traj)
}

/// Sup-norm of `u(t) - e^{t Delta} u0 - a int_0^t e^{(t-s) Delta} |u_x(s)|^p ds`,
/// with the time integral by the trapezoid rule over the trajectory's
/// snapshots in `[0, t]`.
pub fn duhamel_residual(trajectory: &Trajectory, problem: &HJProblem, t: f64) -> Result<f64> {
    let snaps: Vec<&(f64, GridFunction)> =
        trajectory.snapshots.iter().filter(|(s, _)| *s <= t * (1.0 + 1e-12)).collect();
    if snaps.len() < 3 || snaps[0].0 != 0.0 {
        return Err(HjError::InsufficientData(format!(
            "need snapshots at 0, t and in between; have {} in [0, {t}]",
            snaps.len()
        )));
    }
    let ut = trajectory.snapshot_at(t).ok_or_else(|| HjError::InsufficientData(format!("no snapshot at t = {t}")))?;
    let modes = DEFAULT_HEAT_MODES;
    let heat = HeatSeries::project(&problem.u0, modes)?.evaluate(t)?;

    let integrand = |s: f64, u: &GridFunction| -> Result<GridFunction> {
        let g = gradient(u)?.map(|v| v.abs().powf(problem.p));
        HeatSeries::project(&g, modes)?.evaluate((t - s).max(0.0))
    };
    let mut integral = GridFunction::zeros(problem.grid());
    let mut prev = integrand(snaps[0].0, &snaps[0].1)?;
    for w in snaps.windows(2) {
        let (s0, s1) = (w[0].0, w[1].0);
        let next = integrand(s1, &w[1].1)?;
        let h = 0.5 * (s1 - s0);
        integral = integral.zip_with(&prev, |acc, f| acc + h * f)?.zip_with(&next, |acc, f| acc + h * f)?;
        prev = next;
    }
    let residual = ut.zip_with(&heat, |u, v| u - v)?.zip_with(&integral, |r, i| r - problem.a * i)?;
    Ok(sup_norm(&residual))
}
