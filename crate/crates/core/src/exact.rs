//! Closed-form oracles: Cole-Hopf for `p = 2`, the radial stationary profile
//! for `p < 1`, the profiled rearrangement, and the sub/supersolution seeds
//! used for `p > 2`.

use serde::{Deserialize, Serialize};

use crate::domain::{grad_sup_norm, sup_norm, Grid1D, GridFunction, Interval};
use crate::error::{HjError, Result};
use crate::heat::HeatSeries;
use crate::solver::HJProblem;

/// Solution of `u_t - u_xx = a |u_x|^2` via `U = e^{a u} - 1`:
/// `u(t) = log(1 + e^{t Delta} U0) / a`.
pub fn cole_hopf_solve(a: f64, u0: &GridFunction, t: f64) -> Result<GridFunction> {
    ColeHopf::new(a, u0)?.solution(t)
}

/// Cole-Hopf transform of one initial datum, reusable across times.
#[derive(Debug, Clone)]
pub struct ColeHopf {
    a: f64,
    series: HeatSeries,
}

impl ColeHopf {
    pub fn new(a: f64, u0: &GridFunction) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(HjError::InvalidParameter(format!("a must be finite and nonzero, got {a}")));
        }
        if !u0.is_dirichlet() {
            return Err(HjError::NotDirichlet);
        }
        let big_u0 = u0.map(|v| (a * v).exp_m1());
        Ok(Self { a, series: HeatSeries::project(&big_u0, usize::MAX)? })
    }

    fn heat(&self, t: f64) -> Result<GridFunction> {
        let v = self.series.evaluate(t)?;
        let min = v.min_value();
        if !(1.0 + min > 0.0) {
            return Err(HjError::ColeHopfPositivity(1.0 + min));
        }
        Ok(v)
    }

    pub fn solution(&self, t: f64) -> Result<GridFunction> {
        let a = self.a;
        Ok(self.heat(t)?.map(|v| v.ln_1p() / a))
    }

    /// `u_x = (1/a) (e^{t Delta} U0)_x / (1 + e^{t Delta} U0)` with the
    /// x-derivative taken exactly on the truncated series.
    pub fn gradient(&self, t: f64) -> Result<GridFunction> {
        let v = self.heat(t)?;
        let dv = self.series.evaluate_gradient(t)?;
        let a = self.a;
        dv.zip_with(&v, |d, w| d / (a * (1.0 + w)))
    }
}

/// Radial profile and (for one dimension) the full field of the stationary
/// solution for `a = 1`, `p in (0, 1)` on the unit ball.
#[derive(Debug, Clone)]
pub struct StationaryProfile {
    pub p: f64,
    pub n_dim: usize,
    /// `w(r)` on `[0, 1]`.
    pub radial: GridFunction,
    /// `w(x)` on `(-1, 1)`, present when `n_dim == 1`.
    pub field: Option<GridFunction>,
}

/// Peak value `(1-p)^{(2-p)/(1-p)} / ((2-p) (N - (N-1) p)^{1/(1-p)})`.
pub fn stationary_peak(p: f64, n_dim: usize) -> f64 {
    let n = n_dim as f64;
    (1.0 - p).powf((2.0 - p) / (1.0 - p)) / ((2.0 - p) * (n - (n - 1.0) * p).powf(1.0 / (1.0 - p)))
}

pub fn stationary_value(p: f64, n_dim: usize, r: f64) -> f64 {
    stationary_peak(p, n_dim) * (1.0 - r.abs().powf((2.0 - p) / (1.0 - p)))
}

/// Samples the stationary profile with `n_cells` cells on `[0, 1]` (and
/// `2 * n_cells` on `(-1, 1)` so the two share nodes).
pub fn stationary_ball(p: f64, n_dim: usize, n_cells: usize) -> Result<StationaryProfile> {
    if !(p > 0.0 && p < 1.0) {
        return Err(HjError::InvalidParameter(format!("stationary profile needs p in (0, 1), got {p}")));
    }
    if n_dim == 0 {
        return Err(HjError::InvalidParameter("n_dim must be >= 1".into()));
    }
    let radial = GridFunction::from_fn(Grid1D::new(Interval::unit(), n_cells)?, |r| stationary_value(p, n_dim, r));
    let field = if n_dim == 1 {
        let g = Grid1D::new(Interval::symmetric(), 2 * n_cells)?;
        Some(GridFunction::dirichlet_from_fn(g, |x| stationary_value(p, 1, x)))
    } else {
        None
    };
    Ok(StationaryProfile { p, n_dim, radial, field })
}

/// `ubar(x) = sup { u(y) : |y| >= |x| }` on a grid symmetric about 0.
pub fn profiled_rearrangement(u0: &GridFunction) -> Result<GridFunction> {
    let grid = *u0.grid();
    if !grid.interval.is_symmetric() || !grid.n_cells.is_multiple_of(2) {
        return Err(HjError::InvalidParameter(
            "rearrangement needs a grid symmetric about 0 with an even cell count".into(),
        ));
    }
    let min = u0.min_value();
    if min < 0.0 {
        return Err(HjError::NegativeField(min));
    }
    if !u0.is_dirichlet() {
        return Err(HjError::NotDirichlet);
    }
    let n = grid.n_cells;
    let v = u0.values();
    let mut out = vec![0.0; n + 1];
    // Walk inwards from the boundary pair (0, n) keeping a running max.
    let mut running = 0.0f64;
    for k in 0..=n / 2 {
        running = running.max(v[k]).max(v[n - k]);
        out[k] = running;
        out[n - k] = running;
    }
    GridFunction::new(grid, out)
}

/// Heat-flow seeds with `e^{t Delta} w0 <= u(t) <= e^{t Delta} W0`.
#[derive(Debug, Clone)]
pub struct EnvelopePair {
    pub w0: GridFunction,
    pub big_w0: GridFunction,
    /// `|a| ||u0||_{C1}^{p-2}`, used when `a < 0`.
    pub c_lower: f64,
    /// `a C7^{p-2}` with `C7` the observed gradient bound, used when `a > 0`.
    pub c_upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstants {
    pub c_lower: f64,
    pub c_upper: f64,
}

/// Builds the envelope seeds for `p > 2`. `c7_observed` is a bound on
/// `||u_x(t)||_inf` over the run; it is only used when `a > 0`.
pub fn envelope_pair(problem: &HJProblem, c7_observed: f64) -> Result<EnvelopePair> {
    let (a, p, u0) = (problem.a, problem.p, &problem.u0);
    if !(p > 2.0) {
        return Err(HjError::InvalidParameter(format!("envelopes need p > 2, got {p}")));
    }
    let min = u0.min_value();
    if min < 0.0 {
        return Err(HjError::NegativeField(min));
    }
    if a < 0.0 {
        let c1 = sup_norm(u0).max(grad_sup_norm(u0)?);
        let c6 = a.abs() * c1.powf(p - 2.0);
        let w0 = if c6 > 0.0 { u0.map(|v| -(-c6 * v).exp_m1() / c6) } else { u0.clone() };
        Ok(EnvelopePair { w0, big_w0: u0.clone(), c_lower: c6, c_upper: 0.0 })
    } else {
        if !(c7_observed >= 0.0) || !c7_observed.is_finite() {
            return Err(HjError::InvalidParameter(format!(
                "a > 0 needs a finite observed gradient bound, got {c7_observed}"
            )));
        }
        let c8 = a * c7_observed.powf(p - 2.0);
        let big_w0 = if c8 > 0.0 { u0.map(|v| (c8 * v).exp_m1() / c8) } else { u0.clone() };
        Ok(EnvelopePair { w0: u0.clone(), big_w0, c_lower: 0.0, c_upper: c8 })
    }
}
