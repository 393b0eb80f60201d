//! Uniform one-dimensional grids and the functions sampled on them.
//!
//! Every field in the crate is a [`GridFunction`]: node values on a uniform
//! grid `x_i = left + i * dx`, `i = 0..=n_cells`. Dirichlet fields carry exact
//! zeros at both end nodes.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{HjError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if !(left < right) || !left.is_finite() || !right.is_finite() {
            return Err(HjError::InvalidInterval { left, right });
        }
        Ok(Self { left, right })
    }

    /// The full problem domain (-1, 1).
    pub fn symmetric() -> Self {
        Self { left: -1.0, right: 1.0 }
    }

    /// The half domain (0, 1) of the reduced problem.
    pub fn unit() -> Self {
        Self { left: 0.0, right: 1.0 }
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }

    pub fn is_symmetric(&self) -> bool {
        self.left == -self.right
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub interval: Interval,
    pub n_cells: usize,
}

impl Grid1D {
    pub fn new(interval: Interval, n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(HjError::TooFewCells { min: 2, got: n_cells });
        }
        Ok(Self { interval, n_cells })
    }

    pub fn dx(&self) -> f64 {
        self.interval.length() / self.n_cells as f64
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn x(&self, i: usize) -> f64 {
        // Hit the right end exactly.
        if i == self.n_cells {
            return self.interval.right;
        }
        self.interval.left + i as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.x(i)).collect()
    }
}

/// Node values of a function on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid1D,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(HjError::LengthMismatch { expected: grid.n_nodes(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![0.0; grid.n_nodes()] }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values }
    }

    /// Samples `f` and pins both end values to exactly zero.
    pub fn dirichlet_from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let mut g = Self::from_fn(grid, f);
        g.impose_dirichlet();
        g
    }

    pub fn impose_dirichlet(&mut self) {
        let n = self.grid.n_cells;
        self.values[0] = 0.0;
        self.values[n] = 0.0;
    }

    pub fn is_dirichlet(&self) -> bool {
        self.values[0] == 0.0 && self.values[self.grid.n_cells] == 0.0
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Nodewise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(HjError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Restriction to the nodes lying in `[left, right]`. Both ends must fall
    /// on grid nodes.
    pub fn restrict(&self, interval: Interval) -> Result<Self> {
        let dx = self.grid.dx();
        let i0 = ((interval.left - self.grid.interval.left) / dx).round();
        let i1 = ((interval.right - self.grid.interval.left) / dx).round();
        let on_node = |i: f64, x: f64| (self.grid.interval.left + i * dx - x).abs() <= 1e-12 * dx.max(1.0);
        if i0 < 0.0 || i1 > self.grid.n_cells as f64 || !on_node(i0, interval.left) || !on_node(i1, interval.right) {
            return Err(HjError::InvalidParameter(format!(
                "interval ({}, {}) is not a node-aligned sub-interval of the grid",
                interval.left, interval.right
            )));
        }
        let (i0, i1) = (i0 as usize, i1 as usize);
        let grid = Grid1D::new(interval, i1 - i0)?;
        Self::new(grid, self.values[i0..=i1].to_vec())
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(self)
    }

    pub fn grad_sup_norm(&self) -> Result<f64> {
        grad_sup_norm(self)
    }

    /// Writes the `x,value` CSV form, 17 significant digits per number.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut buf = String::from("x,value\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(buf, "{:.16e},{:.16e}", self.grid.x(i), v);
        }
        out.write_all(buf.as_bytes())
    }

    /// Reads the `x,value` CSV form back. The grid is rebuilt from the first
    /// and last abscissae.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (k, line) in input.lines().enumerate() {
            let line = line.map_err(|e| HjError::InvalidParameter(e.to_string()))?;
            let line = line.trim();
            if k == 0 {
                if line != "x,value" {
                    return Err(HjError::InvalidParameter(format!("bad CSV header {line:?}")));
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let (x, v) =
                line.split_once(',').ok_or_else(|| HjError::InvalidParameter(format!("bad CSV row {line:?}")))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| HjError::InvalidParameter(format!("{s:?}: {e}")));
            xs.push(parse(x)?);
            vs.push(parse(v)?);
        }
        if xs.len() < 3 {
            return Err(HjError::TooFewCells { min: 2, got: xs.len().saturating_sub(1) });
        }
        let grid = Grid1D::new(Interval::new(xs[0], xs[xs.len() - 1])?, xs.len() - 1)?;
        Self::new(grid, vs)
    }
}

/// First Dirichlet eigenvalue and L2-normalized, nonnegative eigenfunction.
#[derive(Debug, Clone)]
pub struct HeatEigenpair {
    pub lambda1: f64,
    pub e1: GridFunction,
}

/// Max of |values[i]| over the nodes.
pub fn sup_norm(f: &GridFunction) -> f64 {
    f.values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Nodal derivative estimates: centered in the interior, second-order
/// one-sided (3-point) at both ends.
pub fn gradient(f: &GridFunction) -> Result<GridFunction> {
    let n = f.grid.n_cells;
    if n < 2 {
        return Err(HjError::TooFewCells { min: 2, got: n });
    }
    let h = f.grid.dx();
    let u = &f.values;
    let mut g = vec![0.0; n + 1];
    g[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    g[n] = (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * h);
    for i in 1..n {
        g[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
    }
    GridFunction::new(f.grid, g)
}

pub fn grad_sup_norm(f: &GridFunction) -> Result<f64> {
    Ok(sup_norm(&gradient(f)?))
}

/// Node index attaining the gradient sup-norm (first one on ties).
pub fn grad_argmax(f: &GridFunction) -> Result<usize> {
    let g = gradient(f)?;
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in g.values.iter().enumerate() {
        if v.abs() > best.1 {
            best = (i, v.abs());
        }
    }
    Ok(best.0)
}

/// Composite Simpson weights (including the `dx / 3` factor).
pub(crate) fn simpson_weights(grid: &Grid1D) -> Result<Vec<f64>> {
    let n = grid.n_cells;
    if !n.is_multiple_of(2) {
        return Err(HjError::OddCellCount(n));
    }
    let h3 = grid.dx() / 3.0;
    Ok((0..=n)
        .map(|i| {
            if i == 0 || i == n {
                h3
            } else if i % 2 == 1 {
                4.0 * h3
            } else {
                2.0 * h3
            }
        })
        .collect())
}

/// Simpson approximation of the integral of `f` over the grid interval.
pub fn integrate(f: &GridFunction) -> Result<f64> {
    let w = simpson_weights(&f.grid)?;
    Ok(w.iter().zip(&f.values).map(|(w, v)| w * v).sum())
}

/// Simpson approximation of the L2 inner product.
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    if f.grid != g.grid {
        return Err(HjError::GridMismatch);
    }
    let w = simpson_weights(&f.grid)?;
    Ok(w.iter().zip(f.values.iter().zip(&g.values)).map(|(w, (a, b))| w * a * b).sum())
}

/// Closed-form first Dirichlet eigenpair on one of the two canonical
/// intervals, sampled on `grid`.
pub fn first_eigenpair(grid: Grid1D) -> Result<HeatEigenpair> {
    let iv = grid.interval;
    if iv == Interval::symmetric() {
        Ok(HeatEigenpair {
            lambda1: PI * PI / 4.0,
            e1: GridFunction::dirichlet_from_fn(grid, |x| (PI * x / 2.0).cos()),
        })
    } else if iv == Interval::unit() {
        Ok(HeatEigenpair {
            lambda1: PI * PI,
            e1: GridFunction::dirichlet_from_fn(grid, |x| 2f64.sqrt() * (PI * x).sin()),
        })
    } else {
        Err(HjError::UnsupportedInterval { left: iv.left, right: iv.right })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(n: usize) -> Grid1D {
        Grid1D::new(Interval::symmetric(), n).unwrap()
    }

    fn unit(n: usize) -> Grid1D {
        Grid1D::new(Interval::unit(), n).unwrap()
    }

    #[test]
    fn interval_rejects_reversed_ends() {
        assert!(Interval::new(1.0, -1.0).is_err());
        assert!(Interval::new(0.0, 0.0).is_err());
        assert!(Grid1D::new(Interval::unit(), 1).is_err());
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(sup_norm(&GridFunction::zeros(sym(64))), 0.0);
        for n in [64, 100, 512] {
            let e1 = first_eigenpair(sym(n)).unwrap().e1;
            let dx = sym(n).dx();
            assert!((sup_norm(&e1) - 1.0).abs() <= dx * dx);
        }
        let f = GridFunction::from_fn(sym(64), |x| 1.0 - x.abs().powi(3));
        assert_eq!(sup_norm(&f), 1.0);
    }

    #[test]
    fn grad_sup_norm_examples() {
        assert_eq!(grad_sup_norm(&GridFunction::zeros(sym(16))).unwrap(), 0.0);
        let g = sym(512);
        let e1 = first_eigenpair(g).unwrap().e1;
        assert!((grad_sup_norm(&e1).unwrap() - PI / 2.0).abs() <= g.dx());
        let lin = GridFunction::from_fn(unit(64), |x| 3f64.sqrt() * (1.0 - x));
        assert!((grad_sup_norm(&lin).unwrap() - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn boundary_gradient_is_second_order() {
        let mut errs = Vec::new();
        for n in [32, 64, 128] {
            let e1 = first_eigenpair(sym(n)).unwrap().e1;
            let g = gradient(&e1).unwrap();
            errs.push((g.values()[0] - PI / 2.0).abs());
        }
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5, "{errs:?}");
    }

    #[test]
    fn inner_product_examples() {
        let e1 = first_eigenpair(sym(512)).unwrap().e1;
        assert!((inner_product(&e1, &e1).unwrap() - 1.0).abs() < 1e-8);
        let zero = GridFunction::zeros(sym(512));
        assert_eq!(inner_product(&e1, &zero).unwrap(), 0.0);
        let lin = GridFunction::from_fn(unit(64), |x| 3f64.sqrt() * (1.0 - x));
        assert!((inner_product(&lin, &lin).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inner_product_errors() {
        let a = GridFunction::zeros(sym(64));
        let b = GridFunction::zeros(sym(32));
        assert_eq!(inner_product(&a, &b), Err(HjError::GridMismatch));
        let c = GridFunction::zeros(sym(33));
        assert_eq!(inner_product(&c, &c), Err(HjError::OddCellCount(33)));
    }

    #[test]
    fn first_eigenpair_values() {
        let p = first_eigenpair(sym(128)).unwrap();
        assert!((p.lambda1 - PI * PI / 4.0).abs() < 1e-15);
        assert!((p.lambda1 - 2.4674).abs() < 1e-4);
        assert!(p.e1.values().iter().all(|&v| v >= 0.0));
        assert!(p.e1.is_dirichlet());
        let q = first_eigenpair(unit(128)).unwrap();
        assert_eq!(q.lambda1, PI * PI);
        assert!(q.e1.values().iter().all(|&v| v >= 0.0));
        assert!((inner_product(&q.e1, &q.e1).unwrap() - 1.0).abs() < 1e-8);
        let other = Grid1D::new(Interval::new(0.0, 2.0).unwrap(), 16).unwrap();
        assert!(matches!(first_eigenpair(other), Err(HjError::UnsupportedInterval { .. })));
    }

    #[test]
    fn refinement_orders() {
        // int cos(pi x/2) (1 - x^2) dx over (-1, 1) = 32 / pi^3.
        let quad_err = |n: usize| {
            let e1 = first_eigenpair(sym(n)).unwrap().e1;
            let w = GridFunction::from_fn(sym(n), |x| 1.0 - x * x);
            (inner_product(&e1, &w).unwrap() - 32.0 / PI.powi(3)).abs()
        };
        let (q16, q32) = (quad_err(16), quad_err(32));
        assert!(q16 / q32 > 14.0, "Simpson order: {q16} {q32}");
        // Odd cell counts miss x = 0, so the sampled max is off by O(dx^2).
        let sup_err = |n: usize| (sup_norm(&first_eigenpair(sym(n)).unwrap().e1) - 1.0).abs();
        let (s1, s2) = (sup_err(31), sup_err(63));
        assert!(s1 / s2 > 3.5, "sup order: {s1} {s2}");
    }

    #[test]
    fn mean_value_lower_bound() {
        let g = sym(256);
        let f = GridFunction::dirichlet_from_fn(g, |x| (1.0 - x * x) * (1.0 + 0.3 * x));
        let lower = sup_norm(&f) / (g.interval.length() / 2.0);
        assert!(grad_sup_norm(&f).unwrap() >= lower - g.dx());
    }

    #[test]
    fn restrict_to_half() {
        let e1 = first_eigenpair(sym(64)).unwrap().e1;
        let half = e1.restrict(Interval::unit()).unwrap();
        assert_eq!(half.grid().n_cells, 32);
        assert_eq!(half.values()[0], 1.0);
        assert_eq!(half.values()[32], 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let e1 = first_eigenpair(sym(8)).unwrap().e1;
        let mut buf = Vec::new();
        e1.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,value\n"));
        let back = GridFunction::read_csv(&buf[..]).unwrap();
        assert_eq!(back.values(), e1.values());
        assert_eq!(back.grid().n_cells, 8);
    }
}
