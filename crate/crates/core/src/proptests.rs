//! Property tests over the public operations.

use crate::analysis::fit_series;
use crate::domain::{integrate, sup_norm, Grid1D, GridFunction, Interval};
use crate::exact::profiled_rearrangement;
use crate::solver::{auto_dt, hj_step, HJProblem};
use crate::spectral::{compute_spectrum, trig_bracket, Branch};
use proptest::prelude::*;

fn grid(n: usize) -> Grid1D {
    Grid1D::new(Interval::symmetric(), n).unwrap()
}

fn field(n: usize, vals: &[f64]) -> GridFunction {
    let mut v = vec![0.0; n + 1];
    v[1..n].copy_from_slice(&vals[..n - 1]);
    GridFunction::new(grid(n), v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_preserves_order(
        base in prop::collection::vec(0.0f64..1.0, 31),
        bump in prop::collection::vec(0.0f64..0.5, 31),
        sign in prop::bool::ANY,
        p in prop::sample::select(vec![0.3, 0.5, 1.0, 1.5, 2.0, 3.0]),
    ) {
        let n = 32;
        let a = if sign { 1.0 } else { -1.0 };
        let u = field(n, &base);
        let w_vals: Vec<f64> = base.iter().zip(&bump).map(|(x, y)| x + y).collect();
        let w = field(n, &w_vals);
        let g = grid(n);
        let gmax = crate::domain::grad_sup_norm(&w).unwrap().max(crate::domain::grad_sup_norm(&u).unwrap());
        let dt = auto_dt(a, p, g.dx(), 2.0 * gmax);
        let pr = HJProblem::new(a, p, u.clone()).unwrap();
        let su = hj_step(&u, &pr, dt).unwrap();
        let sw = hj_step(&w, &pr, dt).unwrap();
        for (x, y) in su.values().iter().zip(sw.values()) {
            prop_assert!(*x <= *y + 1e-14);
        }
        prop_assert!(su.is_dirichlet());
        if a < 0.0 {
            prop_assert!(su.min_value() >= -1e-15);
            prop_assert!(su.max_value() <= u.max_value() + 1e-15);
        }
    }

    #[test]
    fn rearrangement_is_profiled_hull(vals in prop::collection::vec(0.0f64..1.0, 39)) {
        let u = field(40, &vals);
        let r = profiled_rearrangement(&u).unwrap();
        let v = r.values();
        prop_assert_eq!(sup_norm(&r), sup_norm(&u));
        prop_assert_eq!(&profiled_rearrangement(&r).unwrap(), &r);
        for i in 0..=40 {
            prop_assert!(v[i] >= u.values()[i]);
            prop_assert_eq!(v[i], v[40 - i]);
        }
        for i in 0..20 {
            prop_assert!(v[i] <= v[i + 1]);
        }
        let bigger = u.map(|x| x + 0.1);
        let mut bigger = bigger;
        bigger.impose_dirichlet();
        let rb = profiled_rearrangement(&bigger).unwrap();
        for (x, y) in v.iter().zip(rb.values()) {
            prop_assert!(x <= y);
        }
    }

    #[test]
    fn integrate_is_linear(c in -5.0f64..5.0, vals in prop::collection::vec(-1.0f64..1.0, 31)) {
        let f = field(32, &vals);
        let lhs = integrate(&f.scale(c)).unwrap();
        prop_assert!((lhs - c * integrate(&f).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn fit_invariant_under_scaling(rate in 0.1f64..10.0, scale in 1e-3f64..1e3) {
        let times: Vec<f64> = (0..50).map(|i| 1.0 + 0.05 * i as f64).collect();
        let a: Vec<f64> = times.iter().map(|t| (-rate * t).exp()).collect();
        let b: Vec<f64> = a.iter().map(|v| v * scale).collect();
        let fa = fit_series(&times, &a, (0.5, 4.0), 0.0).unwrap();
        let fb = fit_series(&times, &b, (0.5, 4.0), 0.0).unwrap();
        prop_assert!((fa.fitted_rate - rate).abs() < 1e-9 * rate.max(1.0));
        prop_assert!((fa.fitted_rate - fb.fitted_rate).abs() < 1e-9);
    }

    #[test]
    fn spectrum_roots_in_brackets(a in prop::sample::select(vec![-1.0, 1.0]).prop_flat_map(|s| (0.01f64..20.0).prop_map(move |m| s * m))) {
        let spec = compute_spectrum(a, 12).unwrap();
        for w in spec.modes.windows(2) {
            prop_assert!(w[1].alpha > w[0].alpha);
        }
        for m in &spec.modes {
            prop_assert!(m.residual <= 1e-12, "a={} n={} res={}", a, m.index, m.residual);
            if m.branch == Branch::Trig {
                let (lo, hi) = trig_bracket(a, m.index);
                prop_assert!(m.sqrt_param > lo && m.sqrt_param < hi);
            }
            if m.index >= 2 || a < 0.0 {
                prop_assert!(m.amplitude <= std::f64::consts::PI.sqrt());
            }
        }
        let r1 = spec.r1();
        let l1 = std::f64::consts::PI.powi(2) / 4.0;
        if a < 0.0 { prop_assert!(r1 > l1); }
        if a > 0.0 && a < 2.0 { prop_assert!(r1 > 0.0 && r1 < l1); }
        if a > 2.0 { prop_assert!(r1 <= 1.0); }
    }

    #[test]
    fn envelope_scalar_maps(c in 1e-3f64..10.0, r in 0.0f64..5.0) {
        prop_assert!(-(-c * r).exp_m1() / c <= r);
        prop_assert!((c * r).exp_m1() / c >= r);
    }
}
