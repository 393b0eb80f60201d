//! The `p = 1` reduced problem on `(0, 1)`.
//!
//! For profiled data the equation reduces to `u_t - u_xx = -a u_x` on
//! `(0, 1)` with `u_x(0) = u(1) = 0`. Writing
//! `u = e^{-a^2 t/4} e^{a x/2} v` turns it into `v_t = v_xx` with
//! `a v(0) + 2 v_x(0) = v(1) = 0`, whose spectrum `alpha_n` is computed here.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{simpson_weights, Grid1D, GridFunction, Interval};
use crate::error::{HjError, Result};

pub const DEFAULT_SERIES_MODES: usize = 64;
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
/// Inward shrink of bracket endpoints.
pub const BRACKET_SHRINK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Trig,
    Linear,
    Hyperbolic,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Trig => "trig",
            Branch::Linear => "linear",
            Branch::Hyperbolic => "hyperbolic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenMode {
    pub index: usize,
    pub alpha: f64,
    pub branch: Branch,
    pub amplitude: f64,
    /// `sqrt(alpha)` (trig), `sqrt(-alpha)` (hyperbolic), 0 (linear).
    pub sqrt_param: f64,
    /// Trig: `|a sin z - 2 z cos z|`. Hyperbolic: relative residual
    /// `|delta e^{a - delta} / (2a - delta) - 1|` with `delta = a - 2s`.
    pub residual: f64,
    /// Bisection bracket for `sqrt_param` (trig) or `delta` (hyperbolic),
    /// before the inward shrink.
    pub bracket: (f64, f64),
}

impl EigenMode {
    pub fn eval(&self, x: f64) -> f64 {
        let y = 1.0 - x;
        match self.branch {
            Branch::Trig => self.amplitude * (self.sqrt_param * y).sin(),
            Branch::Linear => self.amplitude * y,
            Branch::Hyperbolic => self.amplitude * (self.sqrt_param * y).sinh(),
        }
    }

    pub fn sample(&self, grid: Grid1D) -> GridFunction {
        let mut f = GridFunction::from_fn(grid, |x| self.eval(x));
        let n = grid.n_cells;
        f.values_mut()[n] = 0.0;
        f
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobinSpectrum {
    pub a: f64,
    pub modes: Vec<EigenMode>,
}

impl RobinSpectrum {
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn alpha(&self, n: usize) -> f64 {
        self.modes[n - 1].alpha
    }

    /// `a^2/4 + alpha_1`.
    pub fn r1(&self) -> f64 {
        r1_from_mode(self.a, &self.modes[0])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,alpha,branch,amplitude,residual\n");
        for m in &self.modes {
            // Residuals are tiny; exponent form keeps them readable.
            let residual = if m.residual == 0.0 { "0".to_string() } else { format!("{:e}", m.residual) };
            s.push_str(&format!("{},{},{},{},{}\n", m.index, m.alpha, m.branch, m.amplitude, residual));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayExponent {
    pub a: f64,
    pub alpha1: f64,
    pub r1: f64,
}

fn r1_from_mode(a: f64, m: &EigenMode) -> f64 {
    match m.branch {
        Branch::Linear => 1.0,
        // a^2/4 - s^2 = (delta/2)(a - delta/2), free of cancellation.
        Branch::Hyperbolic => {
            let delta = a - 2.0 * m.sqrt_param;
            0.5 * delta * (a - 0.5 * delta)
        }
        Branch::Trig => a * a / 4.0 + m.alpha,
    }
}

/// `w - sin w`, accurate for small `w`.
fn w_minus_sin(w: f64) -> f64 {
    if w.abs() < 0.1 {
        let w2 = w * w;
        w * w2 / 6.0 * (1.0 - w2 / 20.0 * (1.0 - w2 / 42.0 * (1.0 - w2 / 72.0)))
    } else {
        w - w.sin()
    }
}

/// `sinh w - w`, accurate for small `w`.
fn sinh_minus_w(w: f64) -> f64 {
    if w.abs() < 0.1 {
        let w2 = w * w;
        w * w2 / 6.0 * (1.0 + w2 / 20.0 * (1.0 + w2 / 42.0 * (1.0 + w2 / 72.0)))
    } else {
        w.sinh() - w
    }
}

/// `2 (2 - sin(2z)/z)^{-1/2}`.
fn trig_amplitude(z: f64) -> f64 {
    2.0 / (w_minus_sin(2.0 * z) / z).sqrt()
}

/// `2 (sinh(2s)/s - 2)^{-1/2}`.
fn hyperbolic_amplitude(s: f64) -> f64 {
    2.0 / (sinh_minus_w(2.0 * s) / s).sqrt()
}

fn trig_equation(a: f64, z: f64) -> f64 {
    a * z.sin() - 2.0 * z * z.cos()
}

/// Bisection to full floating-point resolution on `[lo, hi]`; returns the
/// endpoint of the final bracket with the smaller `|f|`.
fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(HjError::NoBracket { lo, hi });
    }
    let mut f_hi = f_hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi })
}

/// Bracket for the `n`-th trig root of `tan z = 2z/a` (mode index `n`).
pub fn trig_bracket(a: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    if a < 0.0 {
        ((2.0 * nf - 1.0) * PI / 2.0, nf * PI)
    } else {
        ((nf - 1.0) * PI, (2.0 * nf - 1.0) * PI / 2.0)
    }
}

fn trig_mode(a: f64, n: usize) -> Result<EigenMode> {
    let bracket = trig_bracket(a, n);
    let z = bisect(|z| trig_equation(a, z), bracket.0 + BRACKET_SHRINK, bracket.1 - BRACKET_SHRINK)?;
    Ok(EigenMode {
        index: n,
        alpha: z * z,
        branch: Branch::Trig,
        amplitude: trig_amplitude(z),
        sqrt_param: z,
        residual: trig_equation(a, z).abs(),
        bracket,
    })
}

/// Mode 1 for `a > 2`. With `delta = a - 2s` the root condition
/// `(a + 2s)/(a - 2s) = e^{2s}` reads `delta = (2a - delta) e^{-(a - delta)}`,
/// which stays well conditioned when `delta` underflows relative to `a`.
fn hyperbolic_mode(a: f64) -> Result<EigenMode> {
    let bracket = (0.0, a - (a * (a - 2.0)).sqrt());
    let g = |d: f64| d - (2.0 * a - d) * (-(a - d)).exp();
    let hi = bracket.1 - BRACKET_SHRINK.min(0.5 * bracket.1);
    let delta = bisect(g, bracket.0, hi)?;
    let s = 0.5 * (a - delta);
    let residual = ((delta.ln() + (a - delta) - (2.0 * a - delta).ln()).exp_m1()).abs();
    Ok(EigenMode {
        index: 1,
        alpha: -s * s,
        branch: Branch::Hyperbolic,
        amplitude: hyperbolic_amplitude(s),
        sqrt_param: s,
        residual,
        bracket,
    })
}

fn check_a(a: f64) -> Result<()> {
    if a == 0.0 || !a.is_finite() {
        return Err(HjError::InvalidParameter(format!("a must be finite and nonzero, got {a}")));
    }
    Ok(())
}

pub fn compute_spectrum(a: f64, n_modes: usize) -> Result<RobinSpectrum> {
    check_a(a)?;
    if n_modes == 0 {
        return Err(HjError::InvalidParameter("n_modes must be >= 1".into()));
    }
    let mut modes = Vec::with_capacity(n_modes);
    let first_trig = if a >= 2.0 {
        modes.push(if a == 2.0 {
            EigenMode {
                index: 1,
                alpha: 0.0,
                branch: Branch::Linear,
                amplitude: 3f64.sqrt(),
                sqrt_param: 0.0,
                residual: 0.0,
                bracket: (0.0, 0.0),
            }
        } else {
            hyperbolic_mode(a)?
        });
        2
    } else {
        1
    };
    for n in first_trig..=n_modes {
        modes.push(trig_mode(a, n)?);
    }
    Ok(RobinSpectrum { a, modes })
}

pub fn decay_rate_r1(a: f64) -> Result<DecayExponent> {
    let spec = compute_spectrum(a, 1)?;
    Ok(DecayExponent { a, alpha1: spec.alpha(1), r1: spec.r1() })
}

/// Closed-form alternatives for `r1`: `(z / sin z)^2` for `a in (0, 2)`, and
/// for `a > 2` both `(a + 2s)^2 e^{-2s} / 4` and
/// `-4 alpha_1 e^{2s} / (e^{2s} - 1)^2`. Empty for other `a`.
pub fn r1_cross_identities(spectrum: &RobinSpectrum) -> Vec<f64> {
    let a = spectrum.a;
    let m = &spectrum.modes[0];
    match m.branch {
        Branch::Trig if a > 0.0 => {
            let z = m.sqrt_param;
            vec![(z / z.sin()).powi(2)]
        }
        Branch::Hyperbolic => {
            let s = m.sqrt_param;
            let e = (2.0 * s).exp();
            vec![0.25 * (a + 2.0 * s).powi(2) / e, -4.0 * m.alpha * e / (2.0 * s).exp_m1().powi(2)]
        }
        _ => Vec::new(),
    }
}

/// Writes `r1(a)` over `steps + 1` evenly spaced values of `a`. At `a = 0`
/// the row holds the Neumann limit `alpha_1 = r1 = pi^2/4`.
pub fn r1_sweep_csv(a_from: f64, a_to: f64, steps: usize) -> Result<String> {
    if steps == 0 || !(a_to > a_from) {
        return Err(HjError::InvalidParameter("sweep needs a_to > a_from and steps >= 1".into()));
    }
    let lambda1 = PI * PI / 4.0;
    let mut s = String::from("a,alpha1,r1,lambda1_ratio\n");
    for i in 0..=steps {
        let a = a_from + (a_to - a_from) * i as f64 / steps as f64;
        let (alpha1, r1) = if a == 0.0 {
            (lambda1, lambda1)
        } else {
            let d = decay_rate_r1(a)?;
            (d.alpha1, d.r1)
        };
        s.push_str(&format!("{a},{alpha1},{r1},{}\n", r1 / lambda1));
    }
    Ok(s)
}

/// `v0(x) = e^{-a x/2} u0(x)` on `(0, 1)`.
pub fn to_reduced_v(u0: &GridFunction, a: f64) -> Result<GridFunction> {
    check_a(a)?;
    if u0.grid().interval != Interval::unit() {
        let iv = u0.grid().interval;
        return Err(HjError::UnsupportedInterval { left: iv.left, right: iv.right });
    }
    if *u0.values().last().unwrap() != 0.0 {
        return Err(HjError::NotDirichlet);
    }
    let g = *u0.grid();
    let vals = u0.values().iter().enumerate().map(|(i, u)| (-0.5 * a * g.x(i)).exp() * u).collect();
    GridFunction::new(g, vals)
}

/// The series solution for one reduced datum `v0`, with the projections
/// `<v0, phi_n>` and sampled eigenfunctions cached.
#[derive(Debug, Clone)]
pub struct ReducedSeries {
    spectrum: RobinSpectrum,
    grid: Grid1D,
    coefficients: Vec<f64>,
    phis: Vec<Vec<f64>>,
    weight: Vec<f64>,
    v0_sup: f64,
}

#[derive(Debug, Clone)]
pub struct SeriesSolution {
    pub field: GridFunction,
    pub tail_bound: f64,
    pub modes_used: usize,
}

impl ReducedSeries {
    pub fn new(v0: &GridFunction, spectrum: &RobinSpectrum) -> Result<Self> {
        let grid = *v0.grid();
        if grid.interval != Interval::unit() {
            return Err(HjError::UnsupportedInterval { left: grid.interval.left, right: grid.interval.right });
        }
        let w = simpson_weights(&grid)?;
        let a = spectrum.a;
        let phis: Vec<Vec<f64>> = spectrum.modes.iter().map(|m| m.sample(grid).into_values()).collect();
        let coefficients =
            phis.iter().map(|phi| phi.iter().zip(v0.values()).zip(&w).map(|((p, v), w)| p * v * w).sum()).collect();
        let weight = (0..=grid.n_cells).map(|i| (0.5 * a * grid.x(i)).exp()).collect();
        Ok(Self { spectrum: spectrum.clone(), grid, coefficients, phis, weight, v0_sup: v0.sup_norm() })
    }

    pub fn spectrum(&self) -> &RobinSpectrum {
        &self.spectrum
    }

    /// `<v0, phi_n>` for `n = 1..=n_modes`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Bound on the dropped terms `n > N`:
    /// `e^{a+/2} pi ||v0|| sum_{n>N} e^{-(a^2/4 + ((n-1) pi)^2) t}`.
    pub fn tail_bound(&self, t: f64, n_kept: usize) -> f64 {
        let a = self.spectrum.a;
        let pre = (0.5 * a.max(0.0)).exp() * PI * self.v0_sup;
        let mut sum = 0.0;
        for n in n_kept + 1.. {
            let k = (n - 1) as f64 * PI;
            let term = (-(a * a / 4.0 + k * k) * t).exp();
            sum += term;
            if term <= sum * 1e-17 || term == 0.0 {
                break;
            }
        }
        pre * sum
    }

    /// Smallest mode count whose tail bound at `t` is at most `tol`.
    pub fn modes_needed(&self, t: f64, tol: f64) -> usize {
        let mut n = 1;
        while self.tail_bound(t, n) > tol && n < 1_000_000 {
            n += 1;
        }
        n
    }

    pub fn evaluate(&self, t: f64, tol: f64) -> Result<SeriesSolution> {
        if !(t > 0.0) {
            return Err(HjError::InvalidParameter(format!("series evaluation needs t > 0, got {t}")));
        }
        let n_modes = self.spectrum.n_modes();
        let tail = self.tail_bound(t, n_modes);
        if tail > tol {
            return Err(HjError::SeriesTruncation { bound: tail, tol, needed: self.modes_needed(t, tol) });
        }
        let a = self.spectrum.a;
        let mut vals = vec![0.0; self.grid.n_nodes()];
        for (m, (c, phi)) in self.spectrum.modes.iter().zip(self.coefficients.iter().zip(&self.phis)) {
            let e = (-(a * a / 4.0 + m.alpha) * t).exp() * c;
            if e == 0.0 {
                continue;
            }
            for (v, p) in vals.iter_mut().zip(phi) {
                *v += e * p;
            }
        }
        for (v, w) in vals.iter_mut().zip(&self.weight) {
            *v *= w;
        }
        Ok(SeriesSolution { field: GridFunction::new(self.grid, vals)?, tail_bound: tail, modes_used: n_modes })
    }

    /// `<v0, phi_1> phi_1(x)`.
    pub fn mode1_asymptote(&self, x: f64) -> f64 {
        self.coefficients[0] * self.spectrum.modes[0].eval(x)
    }

    /// `sup_x |e^{r1 t} e^{-a x/2} u(t, x) - <v0, phi_1> phi_1(x)|`, summed
    /// directly over `n >= 2` so the leading cancellation never happens.
    pub fn mode1_residual(&self, t: f64) -> Result<f64> {
        if !(t >= 1.0) {
            return Err(HjError::InvalidParameter(format!("mode-1 asymptotics need t >= 1, got {t}")));
        }
        let alpha1 = self.spectrum.alpha(1);
        let mut vals = vec![0.0; self.grid.n_nodes()];
        for (m, (c, phi)) in self.spectrum.modes.iter().zip(self.coefficients.iter().zip(&self.phis)).skip(1) {
            let e = (-(m.alpha - alpha1) * t).exp() * c;
            for (v, p) in vals.iter_mut().zip(phi) {
                *v += e * p;
            }
        }
        Ok(vals.iter().fold(0.0f64, |s, v| s.max(v.abs())))
    }
}

/// Truncated series for `u(t)` on `(0, 1)`, failing when the tail bound
/// exceeds [`DEFAULT_TAIL_TOL`].
pub fn series_evolve(v0: &GridFunction, spectrum: &RobinSpectrum, t: f64) -> Result<SeriesSolution> {
    ReducedSeries::new(v0, spectrum)?.evaluate(t, DEFAULT_TAIL_TOL)
}

pub fn mode1_asymptote(v0: &GridFunction, spectrum: &RobinSpectrum, t: f64, x: f64) -> Result<f64> {
    if !(t >= 1.0) {
        return Err(HjError::InvalidParameter(format!("mode-1 asymptotics need t >= 1, got {t}")));
    }
    Ok(ReducedSeries::new(v0, spectrum)?.mode1_asymptote(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::inner_product;

    const SWEEP: [f64; 8] = [-10.0, -2.0, -0.5, 0.5, 1.5, 2.0, 3.0, 10.0];

    /// Independent root finder: Newton on tan z - 2z/a from a grid scan of
    /// sign changes of a sin z - 2 z cos z.
    fn scan_roots(a: f64, count: usize) -> Vec<f64> {
        let f = |z: f64| a * z.sin() - 2.0 * z * z.cos();
        let mut roots = Vec::new();
        let h = 1e-4;
        let mut z = 1e-6;
        while roots.len() < count {
            if f(z).signum() != f(z + h).signum() {
                let mut r = z + 0.5 * h;
                for _ in 0..50 {
                    let d = a * r.cos() - 2.0 * r.cos() + 2.0 * r * r.sin();
                    r -= f(r) / d;
                }
                roots.push(r);
            }
            z += h;
        }
        roots
    }

    #[test]
    fn pinned_roots() {
        let s = compute_spectrum(-2.0, 3).unwrap();
        assert!((s.modes[0].sqrt_param - 2.028757838).abs() < 1e-9);
        assert!((s.alpha(1) - 4.115858).abs() < 1e-5);
        let d = decay_rate_r1(-2.0).unwrap();
        assert!((d.r1 - (1.0 + d.alpha1)).abs() < 1e-14);
        assert!((d.r1 - 5.1159).abs() < 1e-4);

        let s = compute_spectrum(1.0, 3).unwrap();
        assert!((s.modes[0].sqrt_param - 1.16556).abs() < 1e-5);
        assert!((s.alpha(1) - 1.3585).abs() < 1e-4);

        let d = decay_rate_r1(4.0).unwrap();
        let s4 = compute_spectrum(4.0, 2).unwrap();
        let s = s4.modes[0].sqrt_param;
        assert_eq!(s4.modes[0].branch, Branch::Hyperbolic);
        assert!(s > 2f64.sqrt() && s < 2.0 && (s - 1.915).abs() < 1e-3, "{s}");
        assert!(d.alpha1 > -4.0 && d.alpha1 < -2.0);
        assert!((d.r1 - 0.33).abs() < 0.01 && d.r1 <= 1.0, "{}", d.r1);
    }

    #[test]
    fn roots_match_independent_scan() {
        for a in SWEEP {
            let spec = compute_spectrum(a, 8).unwrap();
            let trig: Vec<f64> = spec.modes.iter().filter(|m| m.branch == Branch::Trig).map(|m| m.sqrt_param).collect();
            let scan = scan_roots(a, trig.len());
            for (z, r) in trig.iter().zip(&scan) {
                assert!((z - r).abs() < 1e-9, "a={a}: {z} vs {r}");
            }
        }
    }

    #[test]
    fn linear_mode_at_two() {
        let s = compute_spectrum(2.0, 5).unwrap();
        let m = s.modes[0];
        assert_eq!(m.branch, Branch::Linear);
        assert_eq!(m.alpha, 0.0);
        assert_eq!(m.amplitude, 3f64.sqrt());
        assert_eq!(m.eval(0.25), 3f64.sqrt() * 0.75);
        assert_eq!(decay_rate_r1(2.0).unwrap().r1, 1.0);
        assert!(s.to_csv().lines().nth(1).unwrap() == "1,0,linear,1.7320508075688772,0");
    }

    #[test]
    fn brackets_and_residuals() {
        for a in SWEEP {
            let spec = compute_spectrum(a, 20).unwrap();
            assert_eq!(spec.n_modes(), 20);
            for w in spec.modes.windows(2) {
                assert!(w[1].alpha > w[0].alpha);
            }
            for m in &spec.modes {
                match m.branch {
                    Branch::Trig => {
                        let (lo, hi) = trig_bracket(a, m.index);
                        assert!(m.sqrt_param > lo && m.sqrt_param < hi, "a={a} n={}", m.index);
                        assert!(m.residual <= 1e-12, "a={a} n={} res={}", m.index, m.residual);
                        if a >= 2.0 {
                            assert!(m.index >= 2);
                        }
                    }
                    Branch::Hyperbolic => {
                        assert!(a > 2.0 && m.index == 1);
                        assert!(m.alpha > -a * a / 4.0 && m.alpha < -a * (a - 2.0) / 4.0);
                        assert!(m.residual <= 1e-12);
                    }
                    Branch::Linear => assert_eq!(a, 2.0),
                }
            }
        }
    }

    #[test]
    fn hyperbolic_defining_equation() {
        for a in [2.5, 3.0, 4.0, 10.0] {
            let s = compute_spectrum(a, 1).unwrap().modes[0].sqrt_param;
            let lhs = (a + 2.0 * s) / (a - 2.0 * s);
            assert!((lhs / (2.0 * s).exp() - 1.0).abs() < 1e-10, "a={a}");
        }
        let s = compute_spectrum(3.0, 1).unwrap().modes[0].sqrt_param;
        assert!(((a3(s)) - (2.0 * s).exp()).abs() <= 1e-10);
        fn a3(s: f64) -> f64 {
            (3.0 + 2.0 * s) / (3.0 - 2.0 * s)
        }
    }

    #[test]
    fn r1_cross_identities_agree() {
        for a in [0.1, 0.5, 1.0, 1.5, 1.9, 2.1, 2.5, 3.0, 4.0, 6.0, 10.0, 20.0] {
            let spec = compute_spectrum(a, 1).unwrap();
            let r1 = spec.r1();
            let ids = r1_cross_identities(&spec);
            assert!(!ids.is_empty());
            for v in ids {
                assert!((v - r1).abs() <= 1e-10, "a={a}: {v} vs {r1}");
            }
        }
    }

    #[test]
    fn r1_ranges_and_limits() {
        let l1 = PI * PI / 4.0;
        for a in [-10.0, -3.0, -0.1] {
            assert!(decay_rate_r1(a).unwrap().r1 > l1);
        }
        for a in [0.1, 1.0, 1.99] {
            let r = decay_rate_r1(a).unwrap().r1;
            assert!(r > 0.0 && r < l1);
        }
        for a in [2.01, 3.0, 10.0] {
            assert!(decay_rate_r1(a).unwrap().r1 <= 1.0);
        }
        for a in [1e-3, -1e-3] {
            assert!((decay_rate_r1(a).unwrap().r1 - l1).abs() < 1e-2);
        }
        assert!(decay_rate_r1(-10.0).unwrap().r1 > decay_rate_r1(-1.0).unwrap().r1);
        assert!(decay_rate_r1(10.0).unwrap().r1 < decay_rate_r1(3.0).unwrap().r1);
        assert!(decay_rate_r1(0.0).is_err());
        assert!(compute_spectrum(0.0, 3).is_err());
        assert!(compute_spectrum(1.0, 0).is_err());
    }

    #[test]
    fn amplitude_limits() {
        for a in [1e-3, -1e-3] {
            assert!((compute_spectrum(a, 1).unwrap().modes[0].amplitude - 2f64.sqrt()).abs() < 1e-3);
        }
        assert!(compute_spectrum(1.999, 1).unwrap().modes[0].amplitude > 10.0);
        assert!(compute_spectrum(50.0, 1).unwrap().modes[0].amplitude < 0.1);
        for a in SWEEP.into_iter().chain([-50.0, 50.0, 1.999, 2.001]) {
            let spec = compute_spectrum(a, 20).unwrap();
            for m in &spec.modes[1..] {
                assert!(m.amplitude <= PI.sqrt());
            }
            if a < 0.0 {
                assert!(spec.modes[0].amplitude <= PI.sqrt());
            }
        }
    }

    #[test]
    fn orthonormal_and_eigen() {
        let g = Grid1D::new(Interval::unit(), 1024).unwrap();
        for a in [-2.0, 1.0, 2.0, 4.0] {
            let spec = compute_spectrum(a, 10).unwrap();
            let phis: Vec<GridFunction> = spec.modes.iter().map(|m| m.sample(g)).collect();
            for i in 0..10 {
                for j in 0..10 {
                    let ip = inner_product(&phis[i], &phis[j]).unwrap();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-8, "a={a} {i} {j} {ip}");
                }
            }
            // Boundary condition a phi(0) + 2 phi'(0) = 0 via a centered
            // difference on the analytic eigenfunction.
            for m in &spec.modes {
                let h = 1e-5;
                let d = (m.eval(h) - m.eval(-h)) / (2.0 * h);
                let scale = m.amplitude * (1.0 + m.sqrt_param);
                assert!((a * m.eval(0.0) + 2.0 * d).abs() < 1e-6 * scale.max(1.0), "a={a} n={}", m.index);
                assert_eq!(m.sample(g).values()[1024], 0.0);
            }
            assert!(phis[0].values()[1..1024].iter().all(|v| *v > 0.0));
        }
    }

    #[test]
    fn single_mode_series() {
        let g = Grid1D::new(Interval::unit(), 512).unwrap();
        for a in [-1.0, 1.0, 3.0] {
            let spec = compute_spectrum(a, DEFAULT_SERIES_MODES).unwrap();
            let phi1 = spec.modes[0].sample(g);
            for t in [0.5, 1.0, 2.0] {
                let sol = series_evolve(&phi1, &spec, t).unwrap();
                let r = (-spec.r1() * t).exp();
                for (i, v) in sol.field.values().iter().enumerate() {
                    let x = g.x(i);
                    let want = r * (0.5 * a * x).exp() * phi1.values()[i];
                    assert!((v - want).abs() < 1e-9, "a={a} t={t} x={x}");
                }
            }
            let rs = ReducedSeries::new(&phi1, &spec).unwrap();
            assert!(rs.mode1_residual(1.0).unwrap() < 1e-9);
            assert!(rs.mode1_residual(4.0).unwrap() < 1e-9);
        }
        let spec = compute_spectrum(1.0, 8).unwrap();
        let zero = GridFunction::zeros(g);
        let sol = series_evolve(&zero, &spec, 1.0).unwrap();
        assert_eq!(sol.field.sup_norm(), 0.0);
    }

    #[test]
    fn truncation_error_reports_needed_modes() {
        let g = Grid1D::new(Interval::unit(), 256).unwrap();
        let spec = compute_spectrum(1.0, 3).unwrap();
        let v0 = GridFunction::from_fn(g, |x| 1.0 - x);
        match series_evolve(&v0, &spec, 1e-3) {
            Err(HjError::SeriesTruncation { needed, bound, tol }) => {
                assert!(needed > 3);
                assert!(bound > tol);
                let rs = ReducedSeries::new(&v0, &spec).unwrap();
                assert!(rs.tail_bound(1e-3, needed) <= tol);
                assert!(rs.tail_bound(1e-3, needed - 1) > tol);
            }
            other => panic!("{other:?}"),
        }
        assert!(series_evolve(&v0, &spec, 0.0).is_err());
        assert!(mode1_asymptote(&v0, &spec, 0.5, 0.0).is_err());
    }

    #[test]
    fn reduced_transform() {
        let g = Grid1D::new(Interval::unit(), 64).unwrap();
        let u0 = GridFunction::dirichlet_from_fn(g, |x| x.exp() * (1.0 - x));
        let mut u0 = u0;
        u0.values_mut()[0] = 1.0;
        let v0 = to_reduced_v(&u0, 2.0).unwrap();
        for (i, v) in v0.values().iter().enumerate() {
            assert!((v - (1.0 - g.x(i))).abs() < 1e-14);
        }
        assert_eq!(*v0.values().last().unwrap(), 0.0);
        assert_eq!(to_reduced_v(&GridFunction::zeros(g), -3.0).unwrap().sup_norm(), 0.0);
        let sym = Grid1D::new(Interval::symmetric(), 64).unwrap();
        assert!(to_reduced_v(&GridFunction::zeros(sym), 1.0).is_err());
    }

    #[test]
    fn sweep_csv_crosses_at_zero() {
        let csv = r1_sweep_csv(-5.0, 8.0, 260).unwrap();
        let rows: Vec<Vec<f64>> =
            csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), 261);
        let l1 = PI * PI / 4.0;
        for r in &rows {
            if r[0] < 0.0 {
                assert!(r[2] > l1);
            } else if r[0] > 0.0 {
                assert!(r[2] < l1);
            } else {
                assert_eq!(r[3], 1.0);
            }
        }
    }
}
