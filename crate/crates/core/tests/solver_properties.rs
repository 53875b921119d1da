use std::f64::consts::PI;
use std::sync::Arc;

use mond_equilibria::eos::AnsatzModel;
use mond_equilibria::interp::InterpolationModel;
use mond_equilibria::numeric::fit::power_fit;
use mond_equilibria::solver::{classify_support, extend_tail, integrate, series_start, RadialSolution, SolveConfig, Support};
use mond_equilibria::zeta::ZetaModel;
use proptest::prelude::*;

fn zeta(alpha: f64) -> ZetaModel {
    ZetaModel::new(Arc::new(InterpolationModel::simple(alpha).unwrap()))
}

fn solve_with(cfg: SolveConfig, alpha: f64, k: f64, l: f64) -> RadialSolution {
    integrate(&cfg, &AnsatzModel::polytrope(k, l).unwrap(), &zeta(alpha)).unwrap()
}

fn solve(alpha: f64, k: f64, l: f64, y0: f64) -> RadialSolution {
    solve_with(SolveConfig::default().with_y0(y0), alpha, k, l)
}

fn assert_monotone(s: &RadialSolution) {
    assert_eq!(s.r[0], 0.0);
    assert!(s.r.windows(2).all(|w| w[1] > w[0]), "grid not increasing");
    for i in 1..s.len() {
        assert!(s.y[i] < s.y[i - 1], "y not decreasing at r = {}", s.r[i]);
        assert!(s.m[i] >= s.m[i - 1], "m decreasing at r = {}", s.r[i]);
        assert!(s.uprime[i] >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn profiles_are_monotone(
        alpha in prop::sample::select(vec![0.0, 0.25, 0.5, 1.0]),
        l in 0.0f64..1.5,
        k_frac in 0.05f64..0.95,
        y0 in 0.1f64..10.0,
    ) {
        // -1 < k < l + 3/2 keeps every alpha compact
        let k = -1.0 + k_frac * (l + 2.5);
        let s = solve(alpha, k, l, y0);
        prop_assert!(s.support.is_compact());
        assert_monotone(&s);
        prop_assert_eq!(s.y[0], y0);
    }

    #[test]
    fn central_slope_vanishes(alpha in 0.0f64..=1.0, k in -0.5f64..2.0) {
        let s = solve(alpha, k, 0.0, 1.0);
        // y0 - y ~ r^p with p = 1 + 1/(1+alpha) > 1 near the centre
        let n = 40;
        let drop: Vec<f64> = s.y[1..n].iter().map(|y| s.y0() - y).collect();
        let fit = power_fit(&s.r[1..n], &drop, 0.0, f64::INFINITY).unwrap();
        let expected = 1.0 + 1.0 / (1.0 + alpha);
        // the fit sits at the series start radius, where subleading terms
        // shift the local exponent by up to about 2e-2
        prop_assert!(fit.exponent > 1.0);
        prop_assert!((fit.exponent - expected).abs() < 3e-2, "exponent {} vs {}", fit.exponent, expected);
    }
}

#[test]
fn mass_sandwich_in_first_decade() {
    for (alpha, k, l) in [(0.0, 0.0, 0.0), (0.5, 1.0, 0.5), (1.0, 2.0, 1.0), (1.0, -0.5, 0.0)] {
        let a = AnsatzModel::polytrope(k, l).unwrap();
        let s = solve(alpha, k, l, 1.0);
        let (lo_c, hi_c) = (
            4.0 * PI * a.g(0.5).unwrap() / (2.0 * l + 3.0),
            4.0 * PI * a.g(1.0).unwrap() / (2.0 * l + 3.0),
        );
        let r_s = s.r[1];
        for i in 1..s.len() {
            let r = s.r[i];
            if r > 10.0 * r_s {
                break;
            }
            let q = s.m[i] / (r * r) / r.powf(2.0 * l + 1.0);
            assert!(q >= lo_c && q <= hi_c * (1.0 + 1e-12), "alpha={alpha} k={k} l={l} r={r}: {q} not in [{lo_c}, {hi_c}]");
        }
    }
}

#[test]
fn halving_rel_tol_moves_radius_and_mass_within_tolerance() {
    for (alpha, k) in [(0.0, 1.0), (0.5, 0.0), (1.0, 2.0)] {
        let base = SolveConfig::default();
        let a = solve_with(base, alpha, k, 0.0);
        let b = solve_with(SolveConfig { rel_tol: base.rel_tol / 2.0, ..base }, alpha, k, 0.0);
        let (ra, rb) = (a.support.radius().unwrap(), b.support.radius().unwrap());
        let (ma, mb) = (a.support.mass().unwrap(), b.support.mass().unwrap());
        assert!((ra - rb).abs() / ra < 10.0 * base.rel_tol, "alpha={alpha}: dR/R = {}", (ra - rb).abs() / ra);
        assert!((ma - mb).abs() / ma < 10.0 * base.rel_tol, "alpha={alpha}: dM/M = {}", (ma - mb).abs() / ma);
    }
}

#[test]
fn start_radius_does_not_select_the_solution() {
    for (alpha, k) in [(0.0, 1.0), (0.5, 0.0), (1.0, 3.0)] {
        let base = SolveConfig::default();
        let reference = solve_with(base, alpha, k, 0.0);
        let (r0, m0) = (reference.support.radius().unwrap(), reference.support.mass().unwrap());
        for scale in [0.5, 2.0] {
            let s = solve_with(SolveConfig { start_scale: scale, ..base }, alpha, k, 0.0);
            let (r, m) = (s.support.radius().unwrap(), s.support.mass().unwrap());
            assert!((r - r0).abs() / r0 < 1e-8, "alpha={alpha} scale={scale}: dR/R = {}", (r - r0).abs() / r0);
            assert!((m - m0).abs() / m0 < 1e-8, "alpha={alpha} scale={scale}: dM/M = {}", (m - m0).abs() / m0);
        }
    }
}

#[test]
fn sufficient_condition_grid_is_compact() {
    for alpha in [0.0, 0.5, 1.0] {
        for k in [-0.5, 0.0, 1.0] {
            for y0 in [0.1, 1.0, 10.0] {
                let s = solve(alpha, k, 0.0, y0);
                assert!(s.support.is_compact(), "alpha={alpha} k={k} y0={y0}");
            }
        }
    }
}

#[test]
fn density_vanishes_beyond_radius() {
    let s = solve(1.0, 1.0, 0.0, 1.0);
    let Support::Compact { radius, mass } = s.support.clone() else { panic!("not compact") };
    assert_eq!(*s.y.last().unwrap(), 0.0);
    assert_eq!(*s.r.last().unwrap(), radius);
    assert_eq!(*s.m.last().unwrap(), mass);
    let z = zeta(1.0);
    let ext = extend_tail(&s, &z, 1e6 * radius, 10).unwrap();
    for i in s.len()..ext.len() {
        assert_eq!(ext.rho[i], 0.0);
        assert_eq!(ext.m[i], mass);
    }
    let r_end = *ext.r.last().unwrap();
    assert!((r_end * ext.uprime.last().unwrap() / mass.sqrt() - 1.0).abs() < 1e-3);
    assert!(extend_tail(&s, &z, radius, 10).is_err());
}

#[test]
fn newtonian_tail_is_exact() {
    let s = solve(0.0, 0.0, 0.0, 1.0);
    let mass = s.support.mass().unwrap();
    let radius = s.support.radius().unwrap();
    let ext = extend_tail(&s, &zeta(0.0), 1e3 * radius, 10).unwrap();
    for i in s.len()..ext.len() {
        let r = ext.r[i];
        assert!((ext.uprime[i] - mass / (r * r)).abs() <= 1e-15 * mass / (r * r));
        // y(r) = -M (1/R - 1/r)
        assert!((ext.y[i] + mass * (1.0 / radius - 1.0 / r)).abs() < 1e-12 * mass / radius);
    }
}

#[test]
fn newtonian_steep_polytrope_is_extended_with_growing_mass() {
    let s = solve(0.0, 4.0, 0.0, 1.0);
    let Support::Extended(d) = classify_support(&s).unwrap() else { panic!("compact") };
    assert!(d.mass_fit.unwrap().exponent > 0.0);
    assert!(!d.mass_converged);
    assert_eq!(s.support.classification(), "extended; mass divergent");
}

#[test]
fn maxwellian_dichotomy() {
    let z1 = zeta(1.0);
    let m = AnsatzModel::maxwellian();
    let s = integrate(&SolveConfig::default(), &m, &z1).unwrap();
    assert_eq!(s.support.classification(), "extended; mass convergent");
    let Support::Extended(d) = &s.support else { panic!() };
    assert!(d.log_slope_end > 3.0);
    let s0 = integrate(&SolveConfig::default(), &m, &zeta(0.0)).unwrap();
    assert_eq!(s0.support.classification(), "extended; mass divergent");
}

#[test]
fn short_r_max_is_insufficient_for_classification() {
    let m = AnsatzModel::maxwellian();
    let z = zeta(1.0);
    let r_s = series_start(&SolveConfig::default(), &m, &z).unwrap().r;
    let cfg = SolveConfig {
        r_max: 5.0 * r_s,
        ..SolveConfig::default()
    };
    let err = integrate(&cfg, &m, &z).unwrap_err();
    assert!(err.to_string().contains("r_max"), "{err}");
}
