//! `zeta`, the inverse of `tau -> tau mu(tau)`.
//!
//! In spherical symmetry the field equation integrates once to
//! `mu(U') U' = m / r^2`, so `U' = zeta(m / r^2)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::{InterpolationModel, MuFamily};
use crate::numeric::roots::newton_bisect;

/// How `zeta` is evaluated for a given interpolating function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inversion {
    ClosedForm,
    SafeguardedNewton,
}

/// Below this argument the deep-branch asymptote is returned directly.
pub const DEEP_CUTOFF: f64 = 1e-300;
/// Bracket expansions allowed before giving up.
pub const MAX_EXPANSIONS: usize = 200;

#[derive(Debug, Clone)]
pub struct ZetaModel {
    interp: Arc<InterpolationModel>,
    inversion: Inversion,
    tol: f64,
}

/// Last solution of a generic inversion, reused as Newton start. Owned by a
/// single integration; never shared between threads.
#[derive(Debug, Clone, Default)]
pub struct ZetaCache {
    last: Option<(f64, f64)>,
}

/// Maximum deviation of the normalized asymptotes from 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeepExponentReport {
    /// `max |sigma^{-1/(1+alpha)} zeta(sigma) / C - 1|` over `1e-10..1e-4`.
    pub deep_deviation: f64,
    /// `max |zeta(sigma) / sigma - 1|` over `1e4..1e10`.
    pub far_deviation: f64,
}

impl ZetaModel {
    pub fn new(interp: Arc<InterpolationModel>) -> Self {
        let inversion = match interp.family() {
            MuFamily::Newtonian | MuFamily::Standard => Inversion::ClosedForm,
            MuFamily::Simple if interp.alpha() == 1.0 => Inversion::ClosedForm,
            _ => Inversion::SafeguardedNewton,
        };
        Self {
            interp,
            inversion,
            tol: 1e-12,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn interp(&self) -> &InterpolationModel {
        &self.interp
    }

    pub fn interp_arc(&self) -> &Arc<InterpolationModel> {
        &self.interp
    }

    pub fn inversion(&self) -> Inversion {
        self.inversion
    }

    pub fn alpha(&self) -> f64 {
        self.interp.alpha()
    }

    /// Deep-branch asymptote `(sigma / C)^{1/(1+alpha)}`.
    pub fn deep_asymptote(&self, sigma: f64) -> f64 {
        (sigma / self.interp.deep_coefficient()).powf(1.0 / (1.0 + self.alpha()))
    }

    /// `zeta(sigma)` for finite `sigma >= 0`.
    pub fn eval(&self, sigma: f64) -> Result<f64> {
        self.eval_cached(sigma, &mut ZetaCache::default())
    }

    /// As [`eval`](Self::eval), reusing and updating a per-integration cache.
    pub fn eval_cached(&self, sigma: f64, cache: &mut ZetaCache) -> Result<f64> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::Domain(format!(
                "zeta: sigma must be finite and >= 0, got {sigma}"
            )));
        }
        if sigma == 0.0 {
            return Ok(0.0);
        }
        match (self.inversion, self.interp.family()) {
            (Inversion::ClosedForm, MuFamily::Newtonian) => return Ok(sigma),
            (Inversion::ClosedForm, MuFamily::Simple) => {
                // positive root of tau^2 - sigma tau - sigma = 0
                let disc = if sigma > 1e150 {
                    sigma * (1.0 + 4.0 / sigma).sqrt()
                } else {
                    (sigma * sigma + 4.0 * sigma).sqrt()
                };
                return Ok(0.5 * (sigma + disc));
            }
            (Inversion::ClosedForm, MuFamily::Standard) => {
                // tau^4 = sigma^2 (1 + tau^2)
                if sigma > 1e100 {
                    return Ok(sigma * (0.5 + 0.5 * (1.0 + 4.0 / (sigma * sigma)).sqrt()).sqrt());
                }
                return Ok((0.5 * (sigma * sigma + sigma * (sigma * sigma + 4.0).sqrt())).sqrt());
            }
            _ => {}
        }
        if sigma < DEEP_CUTOFF {
            return Ok(self.deep_asymptote(sigma));
        }
        self.invert(sigma, cache)
    }

    fn invert(&self, sigma: f64, cache: &mut ZetaCache) -> Result<f64> {
        let mu = &*self.interp;
        let phi = |tau: f64| tau * mu.mu_raw(tau);
        let a = self.alpha();
        let seed_deep = self.deep_asymptote(sigma);
        let (mut lo, mut hi) = (sigma.min(seed_deep), sigma.max(seed_deep));
        let mut expansions = 0;
        while phi(lo) > sigma {
            lo *= 0.5;
            expansions += 1;
            if expansions > MAX_EXPANSIONS {
                return Err(Error::ZetaBracket { sigma, expansions });
            }
        }
        while phi(hi) < sigma {
            hi *= 2.0;
            expansions += 1;
            if expansions > MAX_EXPANSIONS || !hi.is_finite() {
                return Err(Error::ZetaBracket { sigma, expansions });
            }
        }
        // previous solution scaled along the local power law is a good start
        let guess = cache.last.map(|(s0, t0)| {
            let slope = if sigma < 1.0 { 1.0 / (1.0 + a) } else { 1.0 };
            t0 * (sigma / s0).powf(slope)
        });
        let f_tol = self.tol * sigma.max(f64::MIN_POSITIVE);
        let tau = newton_bisect(
            |tau| {
                let m = mu.mu_raw(tau);
                (tau * m - sigma, m + tau * mu.mu_prime_raw(tau))
            },
            lo,
            hi,
            guess,
            1e-15,
            f_tol,
            400,
        )?;
        cache.last = Some((sigma, tau));
        Ok(tau)
    }

    /// `zeta'(sigma) = 1 / (mu(tau) + tau mu'(tau))` at `tau = zeta(sigma)`.
    pub fn derivative(&self, sigma: f64) -> Result<f64> {
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("zeta': sigma must be > 0, got {sigma}")));
        }
        let tau = self.eval(sigma)?;
        Ok(1.0 / (self.interp.mu_raw(tau) + tau * self.interp.mu_prime_raw(tau)))
    }

    /// Checks both asymptotic branches on fixed decade grids.
    pub fn deep_exponent_check(&self) -> DeepExponentReport {
        let deep_power = 1.0 / (1.0 + self.alpha());
        let coeff = self.interp.deep_coefficient().powf(-deep_power);
        let deep_deviation = (4..=10)
            .map(|j| {
                let s = 10f64.powi(-j);
                match self.eval(s) {
                    Ok(z) => (z * s.powf(-deep_power) / coeff - 1.0).abs(),
                    Err(_) => f64::INFINITY,
                }
            })
            .fold(0.0, f64::max);
        let far_deviation = (4..=10)
            .map(|j| {
                let s = 10f64.powi(j);
                match self.eval(s) {
                    Ok(z) => (z / s - 1.0).abs(),
                    Err(_) => f64::INFINITY,
                }
            })
            .fold(0.0, f64::max);
        DeepExponentReport {
            deep_deviation,
            far_deviation,
        }
    }

    /// Largest `|zeta(tau mu(tau)) - tau| / max(1, tau)` on a log grid of
    /// `tau` in `[1e-8, 1e8]`.
    pub fn round_trip_error(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..=160 {
            let tau = 10f64.powf(-8.0 + 0.1 * i as f64);
            let sigma = tau * self.interp.mu_raw(tau);
            let back = self.eval(sigma)?;
            worst = worst.max((back - tau).abs() / tau.max(1.0));
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn zeta(m: InterpolationModel) -> ZetaModel {
        ZetaModel::new(Arc::new(m))
    }

    fn all() -> Vec<ZetaModel> {
        vec![
            zeta(InterpolationModel::newtonian()),
            zeta(InterpolationModel::simple(0.5).unwrap()),
            zeta(InterpolationModel::simple(0.25).unwrap()),
            zeta(InterpolationModel::simple(1.0).unwrap()),
            zeta(InterpolationModel::standard()),
        ]
    }

    #[test]
    fn examples() {
        assert_eq!(zeta(InterpolationModel::newtonian()).eval(2.0).unwrap(), 2.0);
        assert_relative_eq!(
            zeta(InterpolationModel::simple(1.0).unwrap()).eval(2.0).unwrap(),
            1.0 + 3f64.sqrt(),
            max_relative = 1e-15
        );
        for z in all() {
            assert_eq!(z.eval(0.0).unwrap(), 0.0);
            assert!(z.eval(-1.0).is_err());
            assert!(z.eval(f64::INFINITY).is_err());
        }
    }

    #[test]
    fn closed_forms_agree_with_newton() {
        // Force the generic path on models that have closed forms.
        for m in [InterpolationModel::simple(1.0).unwrap(), InterpolationModel::standard()] {
            let closed = zeta(m.clone());
            let generic = ZetaModel {
                inversion: Inversion::SafeguardedNewton,
                ..closed.clone()
            };
            for j in -40..=40 {
                let s = 10f64.powf(j as f64 * 0.25);
                let a = closed.eval(s).unwrap();
                let b = generic.eval(s).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn round_trip_on_log_grid() {
        for z in all() {
            let err = z.round_trip_error().unwrap();
            assert!(err <= 1e-10, "{}: {err}", z.interp().id());
        }
    }

    #[test]
    fn strictly_increasing_on_increasing_grid() {
        for z in all() {
            let mut last = 0.0;
            for j in 0..400 {
                let s = 10f64.powf(-12.0 + 0.06 * j as f64);
                let v = z.eval(s).unwrap();
                assert!(v > last, "{} at {s}", z.interp().id());
                last = v;
            }
        }
    }

    #[test]
    fn deep_exponent_examples() {
        let newton = zeta(InterpolationModel::newtonian()).deep_exponent_check();
        assert!(newton.deep_deviation < 1e-15);
        assert_eq!(newton.far_deviation, 0.0);
        // zeta ~ sqrt(s) + s/2: worst relative deviation sqrt(1e-4)/2
        let simple = zeta(InterpolationModel::simple(1.0).unwrap()).deep_exponent_check();
        assert!(simple.deep_deviation < 1e-2);
        let standard = zeta(InterpolationModel::standard()).deep_exponent_check();
        assert!(standard.far_deviation < 1e-4);
        for z in all() {
            let r = z.deep_exponent_check();
            assert!(r.deep_deviation < 1e-2 && r.far_deviation < 1e-3, "{}: {r:?}", z.interp().id());
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for z in all() {
            for j in -8..=8 {
                let s = 10f64.powf(j as f64 * 0.5);
                let h = 1e-6 * s;
                let fd = (z.eval(s + h).unwrap() - z.eval(s - h).unwrap()) / (2.0 * h);
                assert_relative_eq!(z.derivative(s).unwrap(), fd, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn three_halves_monotonicity() {
        // zeta(s) - (2/3) s zeta'(s) > 0, zeta' from finite differences
        for z in all() {
            for j in 0..=80 {
                let s = 10f64.powf(-10.0 + 0.25 * j as f64);
                let h = 1e-5 * s;
                let dz = (z.eval(s + h).unwrap() - z.eval(s - h).unwrap()) / (2.0 * h);
                let v = z.eval(s).unwrap() - 2.0 / 3.0 * s * dz;
                assert!(v > 0.0, "{} at {s}: {v}", z.interp().id());
            }
        }
    }

    #[test]
    fn zeta_squared_is_lipschitz_on_unit_interval() {
        // slope of zeta^2 bounded by 2 zeta / mu(zeta) <= 2 (1 + zeta(1))^alpha zeta^{1-alpha}
        for z in all() {
            let a = z.alpha();
            let n = 20_000;
            let h = 1.0 / n as f64;
            let z1 = z.eval(1.0).unwrap();
            let global = 2.0 * (1.0 + z1).powf(a) * z1.powf(1.0 - a);
            let mut prev = 0.0;
            for i in 1..=n {
                let s = i as f64 * h;
                let zs = z.eval(s).unwrap();
                let slope = (zs * zs - prev) / h;
                let pointwise = 2.0 * zs / z.interp().mu(zs).unwrap();
                assert!(slope <= pointwise * (1.0 + 1e-9), "{} s={s}", z.interp().id());
                assert!(slope <= global * (1.0 + 1e-9));
                prev = zs * zs;
            }
        }
    }

    #[test]
    fn cache_does_not_change_results() {
        let z = zeta(InterpolationModel::simple(0.5).unwrap());
        let mut cache = ZetaCache::default();
        for j in 0..200 {
            let s = 10f64.powf(-6.0 + 0.06 * j as f64);
            let a = z.eval_cached(s, &mut cache).unwrap();
            let b = z.eval(s).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn tiny_arguments_use_deep_asymptote() {
        let z = zeta(InterpolationModel::simple(0.5).unwrap());
        let s = 1e-310;
        assert_eq!(z.eval(s).unwrap(), s.powf(1.0 / 1.5));
    }
}
