//! Physical outputs derived from a radial solution: potential, rotation
//! curve, field energy and the effective-potential check.

use std::f64::consts::PI;

use serde::Serialize;

use crate::eos::CutoffConvention;
use crate::error::{Error, Result};
use crate::interp::InterpolationModel;
use crate::numeric::fit::{power_fit, PowerFit};
use crate::numeric::quad::gauss_kronrod;
use crate::numeric::roots::brent;
use crate::solver::{extend_tail, tail_drop, RadialSolution, Support};
use crate::zeta::{ZetaCache, ZetaModel};

/// Potential `U = E0 - y` on the solution grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Potential {
    pub convention: CutoffConvention,
    pub e0: f64,
    pub u: Vec<f64>,
}

/// `int_r^inf zeta(M / s^2) ds` for `alpha < 1`: quadrature up to a radius
/// where the deep branch is exact to working precision, then the closed form.
fn vacuum_tail_to_infinity(zeta: &ZetaModel, mass: f64, r: f64) -> Result<f64> {
    let alpha = zeta.alpha();
    if alpha >= 1.0 {
        return Err(Error::Convention(
            "y_\u{221e} = -\u{221e} in genuine MOND (alpha = 1)".into(),
        ));
    }
    let r_big = (1e3 * r).max((mass * 1e20).sqrt());
    let p = 1.0 / (1.0 + alpha);
    let c = zeta.interp().deep_coefficient();
    let deep = (mass / c).powf(p) * r_big.powf(1.0 - 2.0 * p) / (2.0 * p - 1.0);
    Ok(tail_drop(zeta, mass, r.ln(), r_big.ln())? + deep)
}

/// Reconstructs `U` under the requested cutoff convention. With
/// `E0AtInfinity` the state must be compact and `alpha < 1`; vacuum samples
/// beyond `R` are then evaluated as `-int_r^inf zeta` directly, which avoids
/// cancelling `E0` against `y`.
pub fn reconstruct_potential(
    sol: &RadialSolution,
    zeta: &ZetaModel,
    convention: CutoffConvention,
) -> Result<Potential> {
    match convention {
        CutoffConvention::E0Zero => Ok(Potential {
            convention,
            e0: 0.0,
            u: sol.y.iter().map(|y| -y).collect(),
        }),
        CutoffConvention::E0AtInfinity => {
            if zeta.alpha() >= 1.0 {
                return Err(Error::Convention(
                    "y_\u{221e} = -\u{221e} in genuine MOND (alpha = 1); use e0-zero".into(),
                ));
            }
            let (radius, mass) = match sol.support {
                Support::Compact { radius, mass } => (radius, mass),
                Support::Extended(_) => {
                    return Err(Error::Convention(
                        "E0 at infinity needs a compactly supported state".into(),
                    ))
                }
            };
            let y_r = 0.0;
            let e0 = y_r - vacuum_tail_to_infinity(zeta, mass, radius)?;
            let n = sol.r.len();
            let first_tail = sol.r.partition_point(|&r| r <= radius);
            let mut u: Vec<f64> = sol.y[..first_tail].iter().map(|y| e0 - y).collect();
            if first_tail < n {
                let mut tail = vec![0.0; n - first_tail];
                let last = n - 1;
                tail[last - first_tail] = -vacuum_tail_to_infinity(zeta, mass, sol.r[last])?;
                for i in (first_tail..last).rev() {
                    let drop = tail_drop(zeta, mass, sol.r[i].ln(), sol.r[i + 1].ln())?;
                    tail[i - first_tail] = tail[i + 1 - first_tail] - drop;
                }
                u.extend(tail);
            }
            Ok(Potential { convention, e0, u })
        }
    }
}

/// Large-radius behaviour of the potential and field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Asymptotics {
    /// Fit of `U'` over the last two decades.
    pub uprime_fit: Option<PowerFit>,
    /// Fit of `|U|` (E0 at infinity) over the last two decades; the
    /// expected exponent is `1 - 2/(1+alpha)`.
    pub potential_fit: Option<PowerFit>,
    /// `U(r_end) / ln r_end` for `alpha = 1`.
    pub u_over_log_r: Option<f64>,
    /// `r_end U'(r_end)`, which tends to `sqrt(M)` in the deep branch.
    pub log_slope_end: f64,
    pub r_end: f64,
}

pub fn asymptotics(sol: &RadialSolution, potential: &Potential, alpha: f64) -> Result<Asymptotics> {
    let r_end = *sol.r.last().ok_or_else(|| Error::InsufficientData("empty grid".into()))?;
    let lo = r_end / 100.0;
    let uprime_fit = power_fit(&sol.r, &sol.uprime, lo, r_end);
    let potential_fit = match potential.convention {
        CutoffConvention::E0AtInfinity => {
            let abs_u: Vec<f64> = potential.u.iter().map(|u| u.abs()).collect();
            power_fit(&sol.r, &abs_u, lo, r_end)
        }
        CutoffConvention::E0Zero => None,
    };
    let u_end = *potential.u.last().expect("non-empty");
    let u_over_log_r = (alpha == 1.0 && r_end > 1.0).then(|| u_end / r_end.ln());
    Ok(Asymptotics {
        uprime_fit,
        potential_fit,
        u_over_log_r,
        log_slope_end: r_end * sol.uprime.last().expect("non-empty"),
        r_end,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationCurve {
    pub v: Vec<f64>,
    /// Circular speed at `flat_radius` (`alpha = 1` compact states only).
    pub v_flat: Option<f64>,
    pub flat_radius: Option<f64>,
    /// `v_flat^4 / M`.
    pub tully_fisher_ratio: Option<f64>,
}

/// Radius, in units of `R`, at which the flat velocity is read off.
pub const FLAT_RADIUS_FACTOR: f64 = 1e6;

/// `v = sqrt(r U')` on the grid.
pub fn rotation_curve(sol: &RadialSolution, zeta: &ZetaModel) -> Result<RotationCurve> {
    let v = sol
        .r
        .iter()
        .zip(&sol.uprime)
        .map(|(r, u)| (r * u).max(0.0).sqrt())
        .collect();
    let (mut v_flat, mut flat_radius, mut ratio) = (None, None, None);
    if let (Support::Compact { radius, mass }, true) = (&sol.support, zeta.alpha() == 1.0) {
        let r = FLAT_RADIUS_FACTOR * radius;
        let vf = (r * zeta.eval(mass / (r * r))?).sqrt();
        v_flat = Some(vf);
        flat_radius = Some(r);
        ratio = Some(vf.powi(4) / mass);
    }
    Ok(RotationCurve {
        v,
        v_flat,
        flat_radius,
        tully_fisher_ratio: ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyGrowth {
    Convergent,
    LogDivergent,
}

/// `S(r_hi) - S(r_lo)` over one decade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecadeIncrement {
    pub r_lo: f64,
    pub r_hi: f64,
    pub increment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldEnergy {
    pub r_max: f64,
    /// `S(r_max) = 1/2 int_0^r_max F(U'^2) 4 pi r^2 dr`.
    pub value: f64,
    /// Contribution of the vacuum region `[R, r_max]` (compact states).
    pub vacuum_part: Option<f64>,
    pub increments: Vec<DecadeIncrement>,
    /// Ratios of successive decade increments.
    pub ratios: Vec<f64>,
    pub growth: EnergyGrowth,
}

/// Ratio of successive increments above which growth counts as logarithmic.
const LOG_DIVERGENT_RATIO: f64 = 0.95;

fn energy_density(interp: &InterpolationModel, r: f64, uprime: f64) -> Result<f64> {
    Ok(0.5 * interp.energy_primitive(uprime * uprime)? * 4.0 * PI * r * r)
}

/// Field energy up to `r_max`. Matter regions are integrated by the
/// trapezoid rule on the grid, the vacuum region by quadrature of the exact
/// field `zeta(M / r^2)`. Decade increments start at `R` (or the first
/// grid radius above 1 for extended states).
pub fn field_energy(sol: &RadialSolution, zeta: &ZetaModel, r_max: f64) -> Result<FieldEnergy> {
    let interp = zeta.interp();
    let n = sol.integrated_len.min(sol.r.len());
    let (grid_end, vacuum) = match sol.support {
        Support::Compact { radius, mass } => (radius, Some(mass)),
        Support::Extended(_) => (sol.r[n - 1], None),
    };
    if vacuum.is_none() && r_max > grid_end * (1.0 + 1e-12) {
        return Err(Error::InsufficientData(format!(
            "field energy to {r_max:e} needs grid data beyond the last radius {grid_end:e}"
        )));
    }
    let dens: Vec<f64> = (0..n)
        .map(|i| energy_density(interp, sol.r[i], sol.uprime[i]))
        .collect::<Result<_>>()?;
    // cumulative trapezoid on the grid
    let mut cum = vec![0.0; n];
    for i in 1..n {
        cum[i] = cum[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (sol.r[i] - sol.r[i - 1]);
    }
    let grid_value = |r: f64| -> f64 {
        let j = sol.r[..n].partition_point(|&x| x < r).clamp(1, n - 1);
        let (r0, r1) = (sol.r[j - 1], sol.r[j]);
        let w = ((r - r0) / (r1 - r0)).clamp(0.0, 1.0);
        // trapezoid of the linear interpolant on the partial interval
        let d = dens[j - 1] + w * (dens[j] - dens[j - 1]);
        cum[j - 1] + 0.5 * (dens[j - 1] + d) * (r - r0)
    };
    let vacuum_between = |a: f64, b: f64, mass: f64| -> Result<f64> {
        let mut cache = ZetaCache::default();
        let mut failure = None;
        let q = gauss_kronrod(
            |t| {
                let s = t.exp();
                let eval = zeta
                    .eval_cached(mass / (s * s), &mut cache)
                    .and_then(|u| energy_density(interp, s, u));
                match eval {
                    Ok(v) => s * v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            a.ln(),
            b.ln(),
            0.0,
            1e-10,
            400,
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(q.value),
        }
    };
    let s_at = |r: f64| -> Result<f64> {
        match vacuum {
            Some(mass) if r > grid_end => Ok(cum[n - 1] + vacuum_between(grid_end, r, mass)?),
            _ => Ok(grid_value(r.min(grid_end))),
        }
    };
    let value = s_at(r_max)?;
    let vacuum_part = match vacuum {
        Some(mass) if r_max > grid_end => Some(vacuum_between(grid_end, r_max, mass)?),
        Some(_) => Some(0.0),
        None => None,
    };
    let start = match vacuum {
        Some(_) => grid_end,
        None => sol.r[..n]
            .iter()
            .copied()
            .find(|&r| r >= 1.0)
            .unwrap_or(sol.r[1].max(f64::MIN_POSITIVE)),
    };
    let mut increments = Vec::new();
    let mut lo = start;
    let mut s_lo = s_at(lo)?;
    while lo * 10.0 <= r_max * (1.0 + 1e-12) {
        let hi = lo * 10.0;
        let s_hi = s_at(hi)?;
        increments.push(DecadeIncrement {
            r_lo: lo,
            r_hi: hi,
            increment: s_hi - s_lo,
        });
        lo = hi;
        s_lo = s_hi;
    }
    if increments.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "field-energy classification needs three decades beyond {start:e}, r_max = {r_max:e}"
        )));
    }
    let ratios: Vec<f64> = increments
        .windows(2)
        .map(|w| w[1].increment / w[0].increment)
        .collect();
    let last = *ratios.last().expect("two or more ratios");
    let growth = if last < LOG_DIVERGENT_RATIO {
        EnergyGrowth::Convergent
    } else {
        EnergyGrowth::LogDivergent
    };
    Ok(FieldEnergy {
        r_max,
        value,
        vacuum_part,
        increments,
        ratios,
        growth,
    })
}

/// Result of scanning `Psi_L(r) = L / (2 r^2) + U(r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectivePotentialScan {
    pub l: f64,
    /// Sign changes of `Psi_L'`, i.e. of `h(r) - L` with `h = r^3 U'`.
    pub critical_points: usize,
    /// `h` strictly increasing on the grid where `m > 0`.
    pub h_increasing: bool,
    /// Index of the first grid pair where `h` fails to increase.
    pub first_violation: Option<usize>,
    /// Minimiser of `Psi_L`, the root of `h(r) = L`.
    pub r_l: Option<f64>,
}

fn h_series(sol: &RadialSolution, zeta: &ZetaModel, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    // near the centre m = c r^{2l+3}
    let (r1, m1) = (sol.r[1], sol.m[1]);
    let c = m1 / r1.powf(2.0 * sol.l + 3.0);
    let m = c * r.powf(2.0 * sol.l + 3.0);
    Ok(r.powi(3) * zeta.eval(m / (r * r))?)
}

/// Counts critical points of `Psi_L` and locates its minimiser.
pub fn effective_potential_scan(
    sol: &RadialSolution,
    zeta: &ZetaModel,
    l_value: f64,
) -> Result<EffectivePotentialScan> {
    if !(l_value > 0.0 && l_value.is_finite()) {
        return Err(Error::Domain(format!("L must be positive, got {l_value}")));
    }
    let idx: Vec<usize> = (0..sol.r.len()).filter(|&i| sol.r[i] > 0.0 && sol.m[i] > 0.0).collect();
    if idx.len() < 2 {
        return Err(Error::InsufficientData("no grid points with m > 0".into()));
    }
    let h: Vec<f64> = idx.iter().map(|&i| sol.r[i].powi(3) * sol.uprime[i]).collect();
    let first_violation = h.windows(2).position(|w| !(w[1] > w[0])).map(|p| idx[p]);
    let mut critical_points = 0;
    let mut r_l = None;
    for (j, w) in h.windows(2).enumerate() {
        let (a, b) = (w[0] - l_value, w[1] - l_value);
        if a < 0.0 && b >= 0.0 || a >= 0.0 && b < 0.0 {
            critical_points += 1;
            if r_l.is_none() {
                let (r0, r1) = (sol.r[idx[j]], sol.r[idx[j + 1]]);
                let s = (l_value.ln() - w[0].ln()) / (w[1].ln() - w[0].ln());
                r_l = Some((r0.ln() + s * (r1.ln() - r0.ln())).exp());
            }
        }
    }
    let h_first = h[0];
    let h_last = *h.last().expect("non-empty");
    if l_value < h_first {
        // root lies inside the first grid interval, on the series branch
        let r1 = sol.r[idx[0]];
        let root = brent(
            |r| h_series(sol, zeta, r).map(|v| v - l_value).unwrap_or(f64::NAN),
            0.0,
            r1,
            1e-14 * r1,
            300,
        );
        if let Ok(r) = root {
            r_l = Some(r);
            critical_points += 1;
        }
    } else if l_value > h_last {
        if let Support::Compact { mass, .. } = sol.support {
            let r_end = *sol.r.last().expect("non-empty");
            let hv = |r: f64| zeta.eval(mass / (r * r)).map(|u| r.powi(3) * u - l_value);
            let mut hi = 2.0 * r_end;
            let mut n = 0;
            while hv(hi)? < 0.0 && n < 2000 {
                hi *= 2.0;
                n += 1;
            }
            if hv(hi)? >= 0.0 {
                let r = brent(|r| hv(r).unwrap_or(f64::NAN), r_end, hi, 1e-14 * hi, 300)?;
                r_l = Some(r);
                critical_points += 1;
            }
        }
    }
    Ok(EffectivePotentialScan {
        l: l_value,
        critical_points,
        h_increasing: first_violation.is_none(),
        first_violation,
        r_l,
    })
}

/// `count` log-spaced angular momenta spanning `[1e-6, 1e6] R^2 y0`; `R` is
/// the support radius, or the last grid radius for extended states.
pub fn scan_l_values(sol: &RadialSolution, count: usize) -> Vec<f64> {
    let radius = sol
        .support
        .radius()
        .unwrap_or_else(|| sol.r[sol.integrated_len.min(sol.r.len()) - 1]);
    let l_ref = radius * radius * sol.y0();
    let count = count.max(2);
    (0..count)
        .map(|i| l_ref * 10f64.powf(-6.0 + 12.0 * i as f64 / (count - 1) as f64))
        .collect()
}

/// Settings for [`compute_observables`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservableOptions {
    pub convention: CutoffConvention,
    /// Vacuum tail extent for compact states, in units of `R`.
    pub tail_factor: f64,
    pub tail_points_per_decade: usize,
}

impl Default for ObservableOptions {
    fn default() -> Self {
        Self {
            convention: CutoffConvention::E0Zero,
            tail_factor: 1e6,
            tail_points_per_decade: 50,
        }
    }
}

/// Everything derived from one solution. Field-energy failures (too short
/// a grid) are kept as messages rather than aborting.
#[derive(Debug, Clone, Serialize)]
pub struct ObservableSet {
    /// Solution with the vacuum tail appended (compact states).
    #[serde(skip)]
    pub extended: RadialSolution,
    pub potential: Potential,
    pub rotation: RotationCurve,
    pub energy: std::result::Result<FieldEnergy, String>,
    pub asymptotics: Asymptotics,
}

pub fn compute_observables(
    sol: &RadialSolution,
    zeta: &ZetaModel,
    options: &ObservableOptions,
) -> Result<ObservableSet> {
    let extended = match sol.support {
        Support::Compact { radius, .. } if options.tail_factor > 1.0 => extend_tail(
            sol,
            zeta,
            radius * options.tail_factor,
            options.tail_points_per_decade,
        )?,
        _ => sol.clone(),
    };
    let potential = reconstruct_potential(&extended, zeta, options.convention)?;
    let rotation = rotation_curve(&extended, zeta)?;
    let r_max = *extended.r.last().expect("non-empty");
    let energy = field_energy(&extended, zeta, r_max).map_err(|e| e.to_string());
    let asymptotics = asymptotics(&extended, &potential, zeta.alpha())?;
    Ok(ObservableSet {
        extended,
        potential,
        rotation,
        energy,
        asymptotics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::AnsatzModel;
    use crate::solver::{integrate, SolveConfig};
    use std::sync::Arc;

    fn solve(alpha: f64, k: f64) -> (RadialSolution, ZetaModel) {
        let z = ZetaModel::new(Arc::new(InterpolationModel::simple(alpha).unwrap()));
        let a = AnsatzModel::polytrope(k, 0.0).unwrap();
        (integrate(&SolveConfig::default(), &a, &z).unwrap(), z)
    }

    #[test]
    fn newtonian_e0_at_infinity_is_minus_m_over_r() {
        let (sol, z) = solve(0.0, 1.0);
        let (radius, mass) = (sol.support.radius().unwrap(), sol.support.mass().unwrap());
        let p = reconstruct_potential(&sol, &z, CutoffConvention::E0AtInfinity).unwrap();
        assert!((p.e0 + mass / radius).abs() < 1e-10 * mass / radius);
        let ext = extend_tail(&sol, &z, 1e4 * radius, 20).unwrap();
        let p = reconstruct_potential(&ext, &z, CutoffConvention::E0AtInfinity).unwrap();
        for (r, u) in ext.r.iter().zip(&p.u).filter(|(r, _)| **r > radius) {
            assert!((u + mass / r).abs() < 1e-10 * mass / r, "r = {r}");
        }
    }

    #[test]
    fn genuine_mond_rejects_e0_at_infinity() {
        let (sol, z) = solve(1.0, 1.0);
        let err = reconstruct_potential(&sol, &z, CutoffConvention::E0AtInfinity).unwrap_err();
        assert!(matches!(err, Error::Convention(_)));
        assert!(err.to_string().contains("genuine MOND"));
    }

    #[test]
    fn potential_is_nondecreasing() {
        let (sol, z) = solve(0.5, 0.0);
        let ext = extend_tail(&sol, &z, 1e3 * sol.support.radius().unwrap(), 20).unwrap();
        let p = reconstruct_potential(&ext, &z, CutoffConvention::E0AtInfinity).unwrap();
        assert!(p.u.windows(2).all(|w| w[1] >= w[0]));
        assert!(*p.u.last().unwrap() < 0.0);
    }

    #[test]
    fn keplerian_tail_and_centre() {
        let (sol, z) = solve(0.0, 1.0);
        let mass = sol.support.mass().unwrap();
        let ext = extend_tail(&sol, &z, 1e3 * sol.support.radius().unwrap(), 20).unwrap();
        let rc = rotation_curve(&ext, &z).unwrap();
        assert_eq!(rc.v[0], 0.0);
        let (r, v) = (*ext.r.last().unwrap(), *rc.v.last().unwrap());
        assert!((v - (mass / r).sqrt()).abs() < 1e-12 * v);
        assert!(rc.v_flat.is_none());
    }

    #[test]
    fn newtonian_vacuum_energy_closed_form() {
        let (sol, z) = solve(0.0, 1.0);
        let (radius, mass) = (sol.support.radius().unwrap(), sol.support.mass().unwrap());
        let r_max = 1e4 * radius;
        let e = field_energy(&sol, &z, r_max).unwrap();
        let exact = 2.0 * PI * mass * mass * (1.0 / radius - 1.0 / r_max);
        assert!((e.vacuum_part.unwrap() - exact).abs() < 1e-10 * exact);
        assert_eq!(e.growth, EnergyGrowth::Convergent);
    }

    #[test]
    fn scan_finds_single_minimum() {
        let (sol, z) = solve(1.0, 2.0);
        for l in scan_l_values(&sol, 20) {
            let s = effective_potential_scan(&sol, &z, l).unwrap();
            assert!(s.h_increasing);
            assert_eq!(s.critical_points, 1, "L = {l}");
            let r = s.r_l.unwrap();
            let h = r.powi(3) * z.eval(sol.dense_state(r).map_or(sol.support.mass().unwrap(), |x| x.1) / (r * r)).unwrap();
            assert!((h - l).abs() < 1e-3 * l, "L = {l}, h = {h}");
        }
    }

    #[test]
    fn r_l_vanishes_with_l() {
        let (sol, z) = solve(1.0, 1.0);
        let a = effective_potential_scan(&sol, &z, 1e-12).unwrap().r_l.unwrap();
        let b = effective_potential_scan(&sol, &z, 1e-18).unwrap().r_l.unwrap();
        assert!(b < a && b < 1e-3);
    }
}
