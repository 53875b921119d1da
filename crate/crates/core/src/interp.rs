//! Interpolating functions `mu` of the modified field equation.
//!
//! Every model satisfies `mu(tau) -> 1` as `tau -> inf` and
//! `tau^-alpha mu(tau) -> C` as `tau -> 0` (with `C = 1` for the bundled
//! families). The acceleration threshold `a0` is 1 in code units.

use std::path::Path;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numeric::pchip::{read_two_columns, MonotoneCubic, TableError};
use crate::numeric::quad::gauss_kronrod;

/// Closed family selector, mirroring the `interp.kind` config key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MuFamily {
    Newtonian,
    Simple,
    Standard,
    Table,
}

/// User-supplied `mu` given as samples; monotone-cubic between samples,
/// `C tau^alpha` below the first sample and `1 - (1 - mu_n) tau_n / tau`
/// above the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct MuTable {
    spline: MonotoneCubic,
    deep_coefficient: f64,
    source: String,
}

impl MuTable {
    fn tau_lo(&self) -> f64 {
        self.spline.x_min()
    }
    fn tau_hi(&self) -> f64 {
        self.spline.x_max()
    }
    fn mu_hi(&self) -> f64 {
        *self.spline.values().last().expect("non-empty table")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Newtonian,
    /// `mu(tau) = (tau / (1 + tau))^alpha`
    Simple,
    /// `mu(tau) = tau / sqrt(1 + tau^2)`
    Standard,
    Table(MuTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationModel {
    kind: Kind,
    alpha: f64,
}

/// Tolerance on the declared exponent of a table: `mu(tau_0) tau_0^-alpha`
/// must lie within this relative distance of 1.
pub const TABLE_ALPHA_TOLERANCE: f64 = 0.2;

impl InterpolationModel {
    /// `mu = 1`: the Newtonian field equation.
    pub fn newtonian() -> Self {
        Self {
            kind: Kind::Newtonian,
            alpha: 0.0,
        }
    }

    /// `mu(tau) = (tau / (1 + tau))^alpha`, `alpha` in `[0, 1]`.
    pub fn simple(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(domain(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if alpha == 0.0 {
            return Ok(Self::newtonian());
        }
        Ok(Self {
            kind: Kind::Simple,
            alpha,
        })
    }

    /// `mu(tau) = tau / sqrt(1 + tau^2)` (deep exponent 1).
    pub fn standard() -> Self {
        Self {
            kind: Kind::Standard,
            alpha: 1.0,
        }
    }

    /// Builds a tabulated model. `tau` must be positive and increasing,
    /// `mu` in `(0, 1]`, and `tau mu(tau)` strictly increasing.
    pub fn from_table(tau: Vec<f64>, mu: Vec<f64>, alpha: f64, source: &str) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(domain(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if tau.len() < 3 {
            return Err(TableError::TooShort {
                min: 3,
                got: tau.len(),
            }
            .into());
        }
        if tau[0] <= 0.0 {
            return Err(domain("mu table: tau samples must be positive"));
        }
        for (i, &m) in mu.iter().enumerate() {
            if !(m > 0.0 && m <= 1.0) {
                return Err(domain(format!("mu table row {i}: mu = {m} outside (0, 1]")));
            }
        }
        for i in 1..tau.len().min(mu.len()) {
            if tau[i] * mu[i] <= tau[i - 1] * mu[i - 1] {
                return Err(domain(format!(
                    "mu table row {i}: tau*mu is not strictly increasing ({} -> {})",
                    tau[i - 1] * mu[i - 1],
                    tau[i] * mu[i]
                )));
            }
        }
        let deep_coefficient = mu[0] / tau[0].powf(alpha);
        if (deep_coefficient - 1.0).abs() > TABLE_ALPHA_TOLERANCE {
            return Err(domain(format!(
                "mu table: declared alpha = {alpha} inconsistent with the smallest sample \
                 (mu(tau0) tau0^-alpha = {deep_coefficient:.4})"
            )));
        }
        let spline = MonotoneCubic::new(tau, mu)?;
        Ok(Self {
            kind: Kind::Table(MuTable {
                spline,
                deep_coefficient,
                source: source.to_string(),
            }),
            alpha,
        })
    }

    /// Loads a two-column `tau mu` text table.
    pub fn load_table(path: &Path, alpha: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let (tau, mu) = read_two_columns(&text).map_err(|e| domain(format!("{}: {e}", path.display())))?;
        Self::from_table(tau, mu, alpha, &path.display().to_string())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn family(&self) -> MuFamily {
        match self.kind {
            Kind::Newtonian => MuFamily::Newtonian,
            Kind::Simple => MuFamily::Simple,
            Kind::Standard => MuFamily::Standard,
            Kind::Table(_) => MuFamily::Table,
        }
    }

    /// `lim_{tau -> 0} tau^-alpha mu(tau)`.
    pub fn deep_coefficient(&self) -> f64 {
        match &self.kind {
            Kind::Table(t) => t.deep_coefficient,
            _ => 1.0,
        }
    }

    /// Short identifier used in provenance records.
    pub fn id(&self) -> String {
        match &self.kind {
            Kind::Newtonian => "newtonian".into(),
            Kind::Simple => format!("simple(alpha={})", self.alpha),
            Kind::Standard => "standard".into(),
            Kind::Table(t) => format!("table({}, alpha={})", t.source, self.alpha),
        }
    }

    /// `mu(tau)` without argument checks; `tau >= 0` assumed.
    pub(crate) fn mu_raw(&self, tau: f64) -> f64 {
        match &self.kind {
            Kind::Newtonian => 1.0,
            Kind::Simple => {
                let ratio = tau / (1.0 + tau);
                if self.alpha == 1.0 {
                    ratio
                } else {
                    ratio.powf(self.alpha)
                }
            }
            Kind::Standard => {
                if tau > 1e150 {
                    1.0
                } else {
                    tau / (1.0 + tau * tau).sqrt()
                }
            }
            Kind::Table(t) => {
                if tau < t.tau_lo() {
                    t.deep_coefficient * tau.powf(self.alpha)
                } else if tau > t.tau_hi() {
                    1.0 - (1.0 - t.mu_hi()) * t.tau_hi() / tau
                } else {
                    t.spline.eval(tau)
                }
            }
        }
    }

    /// `mu'(tau)` without argument checks; `tau > 0` assumed.
    pub(crate) fn mu_prime_raw(&self, tau: f64) -> f64 {
        match &self.kind {
            Kind::Newtonian => 0.0,
            Kind::Simple => self.alpha * self.mu_raw(tau) / (tau * (1.0 + tau)),
            Kind::Standard => {
                if tau > 1e100 {
                    0.0
                } else {
                    (1.0 + tau * tau).powf(-1.5)
                }
            }
            Kind::Table(t) => {
                if tau < t.tau_lo() {
                    self.alpha * t.deep_coefficient * tau.powf(self.alpha - 1.0)
                } else if tau > t.tau_hi() {
                    (1.0 - t.mu_hi()) * t.tau_hi() / (tau * tau)
                } else {
                    t.spline.derivative(tau)
                }
            }
        }
    }

    /// `mu(tau)` for `tau >= 0`.
    pub fn mu(&self, tau: f64) -> Result<f64> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(domain(format!("mu: tau must be finite and >= 0, got {tau}")));
        }
        Ok(self.mu_raw(tau))
    }

    /// `mu'(tau)` for `tau > 0`.
    pub fn mu_prime(&self, tau: f64) -> Result<f64> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(domain(format!("mu': tau must be finite and > 0, got {tau}")));
        }
        Ok(self.mu_prime_raw(tau))
    }

    /// `F(tau) = int_0^tau mu(sqrt(s)) ds`, the field-energy density
    /// primitive. Closed forms for the bundled families where they exist.
    pub fn energy_primitive(&self, tau: f64) -> Result<f64> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(domain(format!("F: tau must be finite and >= 0, got {tau}")));
        }
        if tau == 0.0 {
            return Ok(0.0);
        }
        let u = tau.sqrt();
        match &self.kind {
            Kind::Newtonian => return Ok(tau),
            // substitution s = v^2: F = int_0^u 2 v^2 / (1 + v) dv
            Kind::Simple if self.alpha == 1.0 => {
                if u < 1e-3 {
                    // series avoids cancellation: 2(u^3/3 - u^4/4 + u^5/5 - ...)
                    let mut sum = 0.0;
                    let mut term = u * u * u;
                    for n in 3..12 {
                        sum += term / n as f64;
                        term *= -u;
                    }
                    return Ok(2.0 * sum);
                }
                return Ok(tau - 2.0 * u + 2.0 * u.ln_1p());
            }
            Kind::Standard => {
                if u < 1e-3 {
                    // sqrt(s(1+s)) - asinh(sqrt s) = (2/3) u^3 - (1/5) u^5 + (3/28) u^7 - ...
                    let u3 = u * u * u;
                    return Ok(u3 * (2.0 / 3.0 - u * u / 5.0 + 3.0 * u.powi(4) / 28.0));
                }
                return Ok((tau * (1.0 + tau)).sqrt() - u.asinh());
            }
            _ => {}
        }
        // F(tau) = int_0^{sqrt tau} 2 v mu(v) dv
        let q = gauss_kronrod(|v| 2.0 * v * self.mu_raw(v), 0.0, u, 0.0, 1e-12, 2000)?;
        Ok(q.value)
    }
}
