//! Slow, independent references for the fast paths.

use std::f64::consts::PI;

use serde::Serialize;

use crate::eos::{AnsatzKind, AnsatzModel};
use crate::error::{Error, Result};
use crate::interp::InterpolationModel;
use crate::numeric::quad::{gauss_kronrod, tanh_sinh, Quadrature};
use crate::solver::RadialSolution;

/// Density from the phase-space integral
/// `rho(r) = pi / r^2 int int Phi(y - w^2/2 - L/(2 r^2)) L^l dL dw`
/// over the region where the argument is positive.
pub fn rho_bruteforce(ansatz: &AnsatzModel, y: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() || !y.is_finite() {
        return Err(Error::Domain(format!("rho_bruteforce: need finite y and r > 0, got y = {y}, r = {r}")));
    }
    let l = ansatz.l();
    let two_r2 = 2.0 * r * r;
    let mut failure = None;
    let integral = match ansatz.kind() {
        AnsatzKind::Fluid(_) => {
            return Err(Error::Domain("rho_bruteforce: fluids have no phase-space density".into()))
        }
        AnsatzKind::Maxwellian => {
            // Gaussian in w and exponential in L: truncate where e^{-800}
            let w_max = 40.0;
            let l_max = 800.0 * two_r2;
            gauss_kronrod(
                |w| {
                    let inner = gauss_kronrod(
                        |big_l| (y - 0.5 * w * w - big_l / two_r2).exp(),
                        0.0,
                        l_max,
                        0.0,
                        1e-12,
                        400,
                    );
                    match inner {
                        Ok(q) => q.value,
                        Err(e) => {
                            failure.get_or_insert(e);
                            0.0
                        }
                    }
                },
                -w_max,
                w_max,
                0.0,
                1e-11,
                400,
            )?
        }
        AnsatzKind::Polytrope { .. } | AnsatzKind::PhiTable { .. } => {
            if y <= 0.0 {
                return Ok(0.0);
            }
            // a compactly supported Phi vanishes for eta > eta_top; the
            // integrand has a kink there, so split at it
            let eta_top = match ansatz.kind() {
                AnsatzKind::PhiTable { table, .. } => table.support_end(),
                _ => None,
            };
            let w_max = (2.0 * y).sqrt();
            let mut cuts = vec![-w_max];
            if let Some(top) = eta_top.filter(|&t| t < y) {
                let w_c = (2.0 * (y - top)).sqrt();
                cuts.extend([-w_c, w_c]);
            }
            cuts.push(w_max);
            let mut total = 0.0;
            for piece in cuts.windows(2) {
                let q = tanh_sinh(
                    |w, _, _| {
                        // y - w^2/2 = (w_max - w)(w_max + w) / 2 without cancellation
                        let e = 0.5 * (w_max - w) * (w_max + w);
                        let l_top = two_r2 * e;
                        let l_lo = eta_top.map_or(0.0, |top| two_r2 * (e - top).max(0.0));
                        let inner = tanh_sinh(
                            |big_l, _, dl| {
                                let eta = if l_lo == 0.0 { dl / two_r2 } else { e - big_l / two_r2 };
                                ansatz.phi(eta).unwrap_or(0.0) * big_l.powf(l)
                            },
                            l_lo,
                            l_top,
                            0.0,
                            1e-13,
                        );
                        match inner {
                            Ok(q) => q.value,
                            Err(e) => {
                                failure.get_or_insert(e);
                                0.0
                            }
                        }
                    },
                    piece[0],
                    piece[1],
                    0.0,
                    1e-12,
                )?;
                total += q.value;
            }
            Quadrature {
                value: total,
                abs_err: 0.0,
                evaluations: 0,
            }
        }
    };
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(PI / (r * r) * integral.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `max |d/dr[r^2 mu(U') U'] - 4 pi r^2 rho| / max(4 pi r^2 rho)`.
    pub max_residual: f64,
    /// Radius of the maximum.
    pub location: f64,
    /// Largest relative spacing `(r_{i+1} - r_i) / r_i` among interior points.
    pub grid_spacing: f64,
    pub interior_points: usize,
}

/// Minimum number of interior grid points for a residual.
pub const MIN_INTERIOR_POINTS: usize = 100;

/// Residual of the radial field equation by 3-point differences on the
/// (nonuniform) grid, interior points only.
pub fn poisson_residual(sol: &RadialSolution, interp: &InterpolationModel) -> Result<ResidualReport> {
    let n = sol.r.len();
    if n < MIN_INTERIOR_POINTS + 2 {
        return Err(Error::InsufficientData(format!(
            "poisson residual needs at least {MIN_INTERIOR_POINTS} interior points, grid has {n}"
        )));
    }
    let flux = |i: usize| -> Result<f64> {
        let (r, u) = (sol.r[i], sol.uprime[i]);
        Ok(r * r * interp.mu(u)? * u)
    };
    let source = |i: usize| -> f64 {
        if sol.r[i] == 0.0 {
            0.0
        } else {
            4.0 * PI * sol.r[i] * sol.r[i] * sol.rho[i]
        }
    };
    let scale = (0..n).map(source).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::InsufficientData("density vanishes on the grid".into()));
    }
    let mut fluxes = Vec::with_capacity(n);
    for i in 0..n {
        fluxes.push(flux(i)?);
    }
    let mut report = ResidualReport {
        max_residual: 0.0,
        location: f64::NAN,
        grid_spacing: 0.0,
        interior_points: n - 2,
    };
    for i in 1..n - 1 {
        let (x0, x1, x2) = (sol.r[i - 1], sol.r[i], sol.r[i + 1]);
        let (h1, h2) = (x1 - x0, x2 - x1);
        let d = -h2 / (h1 * (h1 + h2)) * fluxes[i - 1]
            + (h2 - h1) / (h1 * h2) * fluxes[i]
            + h1 / (h2 * (h1 + h2)) * fluxes[i + 1];
        let res = (d - source(i)).abs() / scale;
        if res > report.max_residual || report.location.is_nan() {
            report.max_residual = res;
            report.location = x1;
        }
        report.grid_spacing = report.grid_spacing.max(h2 / x1);
    }
    Ok(report)
}

/// Closed-form Newtonian state for `g(y) = c y`
/// (polytrope `k = -1/2`, `l = 0`): `y = y0 sin(a r) / (a r)`, `a = sqrt(4 pi c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaneEmden {
    pub y0: f64,
    pub a: f64,
    pub radius: f64,
    pub mass: f64,
}

impl LaneEmden {
    pub fn y(&self, r: f64) -> f64 {
        let x = self.a * r;
        if x.abs() < 1e-4 {
            self.y0 * (1.0 - x * x / 6.0 + x.powi(4) / 120.0)
        } else {
            self.y0 * x.sin() / x
        }
    }

    /// `m(r) = r^2 |y'(r)|`.
    pub fn m(&self, r: f64) -> f64 {
        let x = self.a * r;
        if x.abs() < 1e-4 {
            return self.y0 * self.a * self.a * r.powi(3) / 3.0;
        }
        self.y0 / self.a * (x.sin() - x * x.cos())
    }
}

pub fn lane_emden_reference(ansatz: &AnsatzModel, interp: &InterpolationModel, y0: f64) -> Result<LaneEmden> {
    if interp.alpha() != 0.0 {
        return Err(Error::Domain("lane_emden_reference needs the Newtonian case (alpha = 0)".into()));
    }
    match ansatz.kind() {
        AnsatzKind::Polytrope { k, l } if *k == -0.5 && *l == 0.0 => {}
        _ => {
            return Err(Error::Domain(
                "lane_emden_reference needs the polytrope k = -1/2, l = 0".into(),
            ))
        }
    }
    if !(y0 > 0.0) {
        return Err(Error::Domain(format!("y0 must be positive, got {y0}")));
    }
    let c = ansatz.g(1.0)?;
    let a = (4.0 * PI * c).sqrt();
    Ok(LaneEmden {
        y0,
        a,
        radius: PI / a,
        mass: y0 * PI / a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{c_l, g_polytrope, PhiTable};
    use approx::assert_relative_eq;

    #[test]
    fn bruteforce_defines_c_l() {
        for l in [0.0, 0.5, 1.0, 2.0] {
            for k in [0.0, 1.0] {
                let a = AnsatzModel::polytrope(k, l).unwrap();
                let brute = rho_bruteforce(&a, 1.0, 1.0).unwrap();
                let fast = g_polytrope(k, l, 1.0).unwrap();
                assert_relative_eq!(brute / fast, 1.0, max_relative = 1e-8);
            }
        }
        assert_relative_eq!(c_l(0.0).unwrap(), 17.7715, max_relative = 1e-5);
    }

    #[test]
    fn bruteforce_scales_with_r_to_the_2l() {
        let a = AnsatzModel::polytrope(0.5, 1.0).unwrap();
        let r = 2.5;
        let brute = rho_bruteforce(&a, 0.8, r).unwrap();
        assert_relative_eq!(brute, r * r * a.g(0.8).unwrap(), max_relative = 1e-8);
    }

    #[test]
    fn bruteforce_examples() {
        let a = AnsatzModel::polytrope(0.0, 0.0).unwrap();
        assert_eq!(rho_bruteforce(&a, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(rho_bruteforce(&a, -1.0, 1.0).unwrap(), 0.0);
        let m = AnsatzModel::maxwellian();
        assert_relative_eq!(rho_bruteforce(&m, 0.0, 1.0).unwrap(), (2.0 * PI).powf(1.5), max_relative = 1e-8);
        assert_relative_eq!(
            rho_bruteforce(&m, 1.0, 3.0).unwrap(),
            (2.0 * PI).powf(1.5) * 1f64.exp(),
            max_relative = 1e-8
        );
    }

    #[test]
    fn bruteforce_matches_phi_table() {
        // Phi = 1 - eta on [0, 1]
        let eta: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let phi: Vec<f64> = eta.iter().map(|e| 1.0 - e).collect();
        let a = AnsatzModel::phi_table(PhiTable::new(eta, phi, 0.0, "t").unwrap(), 0.0).unwrap();
        for y in [0.3, 1.0, 2.0] {
            let brute = rho_bruteforce(&a, y, 1.0).unwrap();
            assert_relative_eq!(brute, a.g(y).unwrap(), max_relative = 1e-7);
        }
    }

    #[test]
    fn fluid_has_no_bruteforce() {
        let f = AnsatzModel::fluid(crate::eos::FluidEos::polytropic(1.0, 1.0).unwrap());
        assert!(rho_bruteforce(&f, 1.0, 1.0).is_err());
    }

    #[test]
    fn lane_emden_solves_its_equation() {
        let a = AnsatzModel::polytrope(-0.5, 0.0).unwrap();
        let le = lane_emden_reference(&a, &InterpolationModel::newtonian(), 2.0).unwrap();
        assert!(le.y(le.radius).abs() < 1e-15);
        assert_eq!(le.y(0.0), 2.0);
        // (r^2 y')' = -4 pi r^2 g(y), checked by differences of m = -r^2 y'
        let c = a.g(1.0).unwrap();
        for r in [0.01, 0.05, 0.1] {
            let h = 1e-6;
            let dm = (le.m(r + h) - le.m(r - h)) / (2.0 * h);
            assert_relative_eq!(dm, 4.0 * PI * r * r * c * le.y(r), max_relative = 1e-7);
            let dy = (le.y(r + h) - le.y(r - h)) / (2.0 * h);
            assert_relative_eq!(-r * r * dy, le.m(r), max_relative = 1e-7);
        }
        assert_relative_eq!(le.m(le.radius), le.mass, max_relative = 1e-14);
        // y'(0) = 0
        assert!((le.y(1e-10) - le.y(0.0)).abs() / 1e-10 < 1e-6);
    }

    #[test]
    fn lane_emden_rejects_other_models() {
        let a = AnsatzModel::polytrope(0.0, 0.0).unwrap();
        assert!(lane_emden_reference(&a, &InterpolationModel::newtonian(), 1.0).is_err());
        let le = AnsatzModel::polytrope(-0.5, 0.0).unwrap();
        assert!(lane_emden_reference(&le, &InterpolationModel::simple(1.0).unwrap(), 1.0).is_err());
    }
}
