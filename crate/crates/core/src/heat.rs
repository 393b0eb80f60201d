//! The Dirichlet heat semigroup `e^{t Delta}` on an interval.
//!
//! Two independent routes are provided: an eigen-expansion in the sine basis
//! ([`HeatSeries`], [`heat_evolve_spectral`]) and a Crank-Nicolson marcher
//! ([`heat_evolve_cn`]). The spectral route is the reference for everything
//! else in the crate that needs `e^{t Delta}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::{gradient, sup_norm, Grid1D, GridFunction};
use crate::error::{HjError, Result};
use crate::tridiag::Tridiagonal;

pub const DEFAULT_HEAT_MODES: usize = 256;

/// Sine eigen-expansion of a grid function:
/// `f(x) ~ sum_k c_k phi_k(x)`, `phi_k(x) = sqrt(2/L) sin(k pi (x - left) / L)`,
/// with eigenvalue `(k pi / L)^2`.
///
/// Coefficients are the discrete sine transform of the interior nodes, taken
/// for every mode the grid can resolve (`k < n_cells`), so the full expansion
/// reproduces `f` at the nodes exactly. Simpson weights would fold mode `k`
/// into mode `n - k`, which is harmless once the high modes have decayed but
/// wrong at small `t`. The first `n_modes` are used for evaluation and the rest
/// only feed [`HeatSeries::tail_bound`].
#[derive(Debug, Clone)]
pub struct HeatSeries {
    grid: Grid1D,
    n_modes: usize,
    coefficients: Vec<f64>,
    sin_table: Vec<f64>,
    cos_table: Vec<f64>,
}

impl HeatSeries {
    /// Projects `f` onto the sine basis. `f` need not vanish at the ends;
    /// the expansion then converges to `f` only in the interior.
    pub fn project(f: &GridFunction, n_modes: usize) -> Result<Self> {
        let grid = *f.grid();
        let n = grid.n_cells;
        if n_modes == 0 {
            return Err(HjError::InvalidParameter("n_modes must be >= 1".into()));
        }
        if n < 2 {
            return Err(HjError::TooFewCells { min: 2, got: n });
        }
        let h = grid.dx();
        let (sin_table, cos_table) = trig_tables(n);
        let norm = (2.0 / grid.interval.length()).sqrt();
        let vals = f.values();
        let resolvable = n - 1;
        let coefficients = (1..=resolvable)
            .map(|k| {
                let mut s = 0.0;
                for i in 1..n {
                    s += vals[i] * sin_table[(k * i) % (2 * n)];
                }
                norm * h * s
            })
            .collect();
        Ok(Self { grid, n_modes: n_modes.min(resolvable), coefficients, sin_table, cos_table })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Number of modes used in evaluation (clamped to what the grid resolves).
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// The first `n_modes` eigen-coefficients.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients[..self.n_modes]
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        let w = k as f64 * PI / self.grid.interval.length();
        w * w
    }

    fn norm(&self) -> f64 {
        (2.0 / self.grid.interval.length()).sqrt()
    }

    /// `sum_{k <= n_modes} c_k e^{-lambda_k t} phi_k`.
    pub fn evaluate(&self, t: f64) -> Result<GridFunction> {
        if t < 0.0 {
            return Err(HjError::NegativeTime(t));
        }
        let n = self.grid.n_cells;
        let mut out = vec![0.0; n + 1];
        let norm = self.norm();
        for k in 1..=self.n_modes {
            let ck = self.coefficients[k - 1] * (-self.eigenvalue(k) * t).exp() * norm;
            if ck == 0.0 {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate().take(n).skip(1) {
                *o += ck * self.sin_table[(k * i) % (2 * n)];
            }
        }
        GridFunction::new(self.grid, out)
    }

    /// Exact x-derivative of the truncated evolved series at the nodes.
    pub fn evaluate_gradient(&self, t: f64) -> Result<GridFunction> {
        if t < 0.0 {
            return Err(HjError::NegativeTime(t));
        }
        let n = self.grid.n_cells;
        let mut out = vec![0.0; n + 1];
        let norm = self.norm();
        let len = self.grid.interval.length();
        for k in 1..=self.n_modes {
            let ck = self.coefficients[k - 1] * (-self.eigenvalue(k) * t).exp() * norm * (k as f64 * PI / len);
            if ck == 0.0 {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += ck * self.cos_table[(k * i) % (2 * n)];
            }
        }
        GridFunction::new(self.grid, out)
    }

    /// Sup-norm bound on the modes dropped by truncation, at time `t`.
    pub fn tail_bound(&self, t: f64) -> f64 {
        let norm = self.norm();
        self.coefficients[self.n_modes..]
            .iter()
            .enumerate()
            .map(|(j, c)| c.abs() * (-self.eigenvalue(self.n_modes + 1 + j) * t).exp())
            .sum::<f64>()
            * norm
    }
}

fn trig_tables(n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = 2 * n;
    let sin = (0..m).map(|j| (PI * j as f64 / n as f64).sin()).collect();
    let cos = (0..m).map(|j| (PI * j as f64 / n as f64).cos()).collect();
    (sin, cos)
}

/// `e^{t Delta} u0` by eigen-expansion with `n_modes` sine modes.
pub fn heat_evolve_spectral(u0: &GridFunction, t: f64, n_modes: usize) -> Result<GridFunction> {
    if t < 0.0 {
        return Err(HjError::NegativeTime(t));
    }
    if !u0.is_dirichlet() {
        return Err(HjError::NotDirichlet);
    }
    HeatSeries::project(u0, n_modes)?.evaluate(t)
}

/// Crank-Nicolson march of the heat equation with homogeneous Dirichlet data.
pub fn heat_evolve_cn(u0: &GridFunction, dt: f64, n_steps: usize) -> Result<GridFunction> {
    if !(dt > 0.0) {
        return Err(HjError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let mut u = u0.clone();
    u.impose_dirichlet();
    if n_steps == 0 {
        return Ok(u0.clone());
    }
    let n = u.grid().n_cells;
    let h = u.grid().dx();
    let r = dt / (h * h);
    let solver = Tridiagonal::new(n - 1, 1.0 + r, -0.5 * r);
    let mut rhs = vec![0.0; n - 1];
    for _ in 0..n_steps {
        let v = u.values();
        for i in 1..n {
            rhs[i - 1] = (1.0 - r) * v[i] + 0.5 * r * (v[i - 1] + v[i + 1]);
        }
        solver.solve(&mut rhs);
        u.values_mut()[1..n].copy_from_slice(&rhs);
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    NormBound,
    GradientBound,
}

/// Smallest constant making the heat-semigroup bound hold on the samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatBoundFit {
    pub c0_value: f64,
    pub kind: BoundKind,
}

/// Empirical constant in `||e^{t Delta} u0|| <= C e^{-t lambda1} ||u0||`
/// (norm kind) or `||grad e^{t Delta} u0|| <= C (1 + t^{-1/2}) e^{-t lambda1} ||u0||`
/// (gradient kind), maximized over `t_samples`.
pub fn fit_heat_constant(u0: &GridFunction, lambda1: f64, kind: BoundKind, t_samples: &[f64]) -> Result<HeatBoundFit> {
    let norm0 = sup_norm(u0);
    if norm0 == 0.0 {
        return Err(HjError::ZeroDatum);
    }
    if t_samples.is_empty() {
        return Err(HjError::InsufficientData("no time samples".into()));
    }
    if t_samples.iter().any(|&t| !(t > 0.0)) || t_samples.windows(2).any(|w| w[1] < w[0]) {
        return Err(HjError::InvalidParameter("t_samples must be positive and sorted".into()));
    }
    if !u0.is_dirichlet() {
        return Err(HjError::NotDirichlet);
    }
    let series = HeatSeries::project(u0, DEFAULT_HEAT_MODES)?;
    let mut c0 = 0.0f64;
    for &t in t_samples {
        let v = series.evaluate(t)?;
        let ratio = match kind {
            BoundKind::NormBound => sup_norm(&v) / ((-t * lambda1).exp() * norm0),
            BoundKind::GradientBound => {
                sup_norm(&gradient(&v)?) / ((1.0 + t.powf(-0.5)) * (-t * lambda1).exp() * norm0)
            }
        };
        c0 = c0.max(ratio);
    }
    Ok(HeatBoundFit { c0_value: c0, kind })
}
