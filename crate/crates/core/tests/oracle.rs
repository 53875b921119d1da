use std::sync::Arc;

use mond_equilibria::eos::AnsatzModel;
use mond_equilibria::interp::InterpolationModel;
use mond_equilibria::oracle::{lane_emden_reference, poisson_residual, rho_bruteforce};
use mond_equilibria::solver::{extend_tail, integrate, SolveConfig};
use mond_equilibria::zeta::ZetaModel;
use proptest::prelude::*;

fn setup(alpha: f64, k: f64, l: f64, density: f64) -> (mond_equilibria::solver::RadialSolution, ZetaModel, AnsatzModel) {
    let z = ZetaModel::new(Arc::new(InterpolationModel::simple(alpha).unwrap()));
    let a = AnsatzModel::polytrope(k, l).unwrap();
    let cfg = SolveConfig {
        grid_density: density,
        ..SolveConfig::default()
    };
    (integrate(&cfg, &a, &z).unwrap(), z, a)
}

#[test]
fn residual_is_second_order_in_grid_density() {
    for (alpha, k, l) in [(0.0, 1.0, 0.0), (0.5, 1.0, 0.0), (1.0, 1.0, 0.0), (0.5, 1.0, 1.0)] {
        let (coarse, z, _) = setup(alpha, k, l, 250.0);
        let (fine, _, _) = setup(alpha, k, l, 500.0);
        let rc = poisson_residual(&coarse, z.interp()).unwrap().max_residual;
        let rf = poisson_residual(&fine, z.interp()).unwrap().max_residual;
        assert!(rc / rf >= 3.9, "alpha={alpha} l={l}: {rc:e} -> {rf:e}");
    }
}

#[test]
fn residual_below_threshold_at_defaults() {
    for (alpha, k, l) in [(0.0, 0.0, 0.0), (0.5, 0.0, 0.0), (1.0, 1.0, 0.0), (1.0, 2.0, 0.5)] {
        let (s, z, _) = setup(alpha, k, l, SolveConfig::default().grid_density);
        let rep = poisson_residual(&s, z.interp()).unwrap();
        assert!(rep.max_residual < 1e-6, "alpha={alpha} k={k} l={l}: {}", rep.max_residual);
        assert!(rep.interior_points >= 100);
    }
}

#[test]
fn residual_detects_a_bump_in_y() {
    let (s, z, a) = setup(1.0, 1.0, 0.0, 2000.0);
    let radius = s.support.radius().unwrap();
    let centre = 0.5 * radius;
    let width = 0.05 * radius;
    let bumped = s
        .perturbed(&a, |r, y| y + 1e-3 * (-((r - centre) / width).powi(2)).exp())
        .unwrap();
    let rep = poisson_residual(&bumped, z.interp()).unwrap();
    assert!(rep.max_residual > 1e-4, "{}", rep.max_residual);
}

#[test]
fn vacuum_tail_has_no_residual() {
    let (s, z, _) = setup(0.5, 1.0, 0.0, 2000.0);
    let radius = s.support.radius().unwrap();
    let ext = extend_tail(&s, &z, 1e4 * radius, 200).unwrap();
    let interp = z.interp();
    let mass = s.support.mass().unwrap();
    // flux r^2 mu(U') U' equals M exactly for every vacuum sample
    for i in s.len()..ext.len() {
        let (r, u) = (ext.r[i], ext.uprime[i]);
        let flux = r * r * interp.mu(u).unwrap() * u;
        assert!((flux - mass).abs() < 1e-11 * mass, "r = {r}: {flux} vs {mass}");
    }
    let rep = poisson_residual(&ext, interp).unwrap();
    assert!(rep.max_residual < 1e-6);
}

#[test]
fn lane_emden_agrees_with_solver() {
    let interp = InterpolationModel::newtonian();
    let z = ZetaModel::new(Arc::new(interp.clone()));
    let a = AnsatzModel::polytrope(-0.5, 0.0).unwrap();
    for y0 in [0.1, 1.0, 10.0] {
        let s = integrate(&SolveConfig::default().with_y0(y0), &a, &z).unwrap();
        let le = lane_emden_reference(&a, &interp, y0).unwrap();
        let dy = s.r.iter().zip(&s.y).map(|(&r, &y)| (y - le.y(r)).abs()).fold(0.0, f64::max);
        assert!(dy / y0 < 1e-8, "y0 = {y0}: {dy}");
        let radius = s.support.radius().unwrap();
        assert!((radius - le.radius).abs() / le.radius < 1e-8);
        let mass = s.support.mass().unwrap();
        assert!((mass - le.mass).abs() / le.mass < 1e-8);
        // y(R) = 0 at R = pi / a
        assert!((le.radius * le.a - std::f64::consts::PI).abs() < 1e-14);
        assert!(le.y(le.radius).abs() < 1e-15 * y0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bruteforce_matches_closed_form(k in -0.5f64..3.0, l in -0.25f64..2.0, y in 0.1f64..5.0, r in 0.2f64..3.0) {
        let a = AnsatzModel::polytrope(k, l).unwrap();
        let brute = rho_bruteforce(&a, y, r).unwrap();
        let fast = r.powf(2.0 * l) * a.g(y).unwrap();
        prop_assert!((brute / fast - 1.0).abs() < 1e-6, "{} vs {}", brute, fast);
    }
}

#[test]
fn maxwellian_bruteforce_at_zero() {
    let v = rho_bruteforce(&AnsatzModel::maxwellian(), 0.0, 1.0).unwrap();
    let expected = (2.0 * std::f64::consts::PI).powf(1.5);
    assert!((v / expected - 1.0).abs() < 1e-6);
    assert_eq!(rho_bruteforce(&AnsatzModel::polytrope(1.0, 0.0).unwrap(), -0.5, 1.0).unwrap(), 0.0);
}
