//! Radial steady states: `y' = -zeta(m / r^2)`, `m' = 4 pi r^{2+2l} g(y)`,
//! `y(0) = y0`, `m(0) = 0`.
//!
//! The origin is singular, so the integration starts at a small radius `r_s`
//! from the leading-order series. From there the system is integrated in
//! `t = ln r` with DOPRI5, which keeps both the core and tails spanning many
//! decades well resolved. For models with a cutoff, the first zero of `y` is
//! the support radius `R`; beyond it the density vanishes and `m = M`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::eos::{AnsatzModel, GEvaluator};
use crate::error::{Error, LastState, Result};
use crate::numeric::fit::{power_fit, PowerFit};
use crate::numeric::ode::{attempt_step, propose_step, DenseStep, OdeSystem, Tolerances};
use crate::numeric::quad::{gauss_kronrod, tanh_sinh};
use crate::numeric::roots::brent;
use crate::zeta::{ZetaCache, ZetaModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveConfig {
    /// Central value `y(0)`.
    pub y0: f64,
    /// Target relative error of the series start.
    pub series_eps: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub r_max: f64,
    /// Relative accuracy of the support radius.
    pub event_tol: f64,
    /// Output samples per unit of `ln r`.
    pub grid_density: f64,
    pub max_steps: usize,
    /// Factor applied to the chosen series-start radius.
    pub start_scale: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            y0: 1.0,
            series_eps: 1e-10,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            r_max: 1e8,
            event_tol: 1e-12,
            grid_density: 2000.0,
            max_steps: 200_000,
            start_scale: 1.0,
        }
    }
}

impl SolveConfig {
    pub fn with_y0(mut self, y0: f64) -> Self {
        self.y0 = y0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("y0", self.y0),
            ("series_eps", self.series_eps),
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("r_max", self.r_max),
            ("event_tol", self.event_tol),
            ("grid_density", self.grid_density),
            ("start_scale", self.start_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("solve.{name} must be positive and finite, got {v}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Domain("solve.max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// State handed from the series expansion to the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesStart {
    pub r: f64,
    pub y: f64,
    pub m: f64,
    /// `y0 - y(r)`.
    pub delta: f64,
    /// Estimated neglected correction, `delta (1 - g(y0 - delta) / g(y0))`.
    pub correction: f64,
    /// Set when the target `series_eps * y0` could not be reached.
    pub unresolved: bool,
}

/// `Delta(r) = int_0^r zeta(c s^{2l+1}) ds`.
fn series_drop(zeta: &ZetaModel, c: f64, l: f64, r: f64) -> Result<f64> {
    let mut cache = ZetaCache::default();
    let mut failure = None;
    let q = tanh_sinh(
        |s, _, _| match zeta.eval_cached(c * s.powf(2.0 * l + 1.0), &mut cache) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        r,
        0.0,
        1e-13,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(q.value),
    }
}

/// Leading-order start `m = c r^{2l+3}`, `y = y0 - Delta(r)` with
/// `c = 4 pi g(y0) / (2l + 3)`.
///
/// The radius is the largest power of two (times 1) for which the neglected
/// correction is below `series_eps * y0` and `Delta <= 1e-2 y0`.
pub fn series_start(config: &SolveConfig, ansatz: &AnsatzModel, zeta: &ZetaModel) -> Result<SeriesStart> {
    config.validate()?;
    let y0 = config.y0;
    let l = ansatz.l();
    let g0 = ansatz.g(y0)?;
    if !(g0 > 0.0) {
        return Err(Error::TrivialState);
    }
    let c = 4.0 * PI * g0 / (2.0 * l + 3.0);
    let trial = |r: f64| -> Result<SeriesStart> {
        let delta = series_drop(zeta, c, l, r)?;
        let g1 = ansatz.g(y0 - delta)?;
        let correction = delta * (1.0 - g1 / g0).abs();
        Ok(SeriesStart {
            r,
            y: y0 - delta,
            m: c * r.powf(2.0 * l + 3.0),
            delta,
            correction,
            unresolved: false,
        })
    };
    let ok = |s: &SeriesStart| s.correction <= config.series_eps * y0 && s.delta <= 1e-2 * y0;

    let rescale = |s: SeriesStart| -> Result<SeriesStart> {
        if config.start_scale == 1.0 {
            return Ok(s);
        }
        let scaled = trial(s.r * config.start_scale)?;
        Ok(SeriesStart {
            unresolved: s.unresolved,
            ..scaled
        })
    };

    let mut r = 1.0;
    let mut best = trial(r)?;
    if ok(&best) {
        for _ in 0..200 {
            let next = trial(2.0 * r)?;
            if !ok(&next) {
                break;
            }
            r *= 2.0;
            best = next;
        }
        return rescale(best);
    }
    let mut closest = best;
    for _ in 0..400 {
        r *= 0.5;
        let s = trial(r)?;
        if ok(&s) && s.m > 0.0 {
            return rescale(s);
        }
        if s.m > 0.0 && s.correction < closest.correction {
            closest = s;
        }
    }
    closest.unresolved = true;
    rescale(closest)
}

/// The reduced system in `t = ln r`.
struct Reduced<'a> {
    zeta: &'a ZetaModel,
    cache: ZetaCache,
    g: GEvaluator<'a>,
    l: f64,
    evaluations: usize,
}

impl OdeSystem<2> for Reduced<'_> {
    type Error = Error;

    fn rhs(&mut self, t: f64, x: &[f64; 2]) -> Result<[f64; 2]> {
        self.evaluations += 1;
        let r = t.exp();
        let (y, m) = (x[0], x[1].max(0.0));
        if !y.is_finite() || !m.is_finite() {
            return Ok([f64::NAN; 2]);
        }
        let u = self.zeta.eval_cached(m / (r * r), &mut self.cache)?;
        let g = self.g.g(y)?;
        Ok([-r * u, 4.0 * PI * r.powf(3.0 + 2.0 * self.l) * g])
    }
}

/// Where `y` tends as `r -> inf` for an extended state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum YLimit {
    /// Decade drops of `y` shrink geometrically; `estimate` extrapolates.
    Finite { estimate: f64 },
    MinusInfinity,
}

/// Tail diagnostics of a state with no support boundary up to `r_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtendedDiagnostics {
    pub r_end: f64,
    pub m_end: f64,
    /// `m ~ r^p` over the last two decades.
    pub mass_fit: Option<PowerFit>,
    /// `rho r^3 ~ r^q` over the last two decades; the mass converges iff `q < 0`.
    pub density_fit: Option<PowerFit>,
    pub mass_converged: bool,
    /// `r U'(r)` at the last sample.
    pub log_slope_end: f64,
    /// Ratio of the last two decade drops of `y`.
    pub y_drop_ratio: f64,
    pub y_limit: YLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Support {
    Compact { radius: f64, mass: f64 },
    Extended(ExtendedDiagnostics),
}

/// Phase of a steady state as used in sweep tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Compact,
    ExtendedFiniteY,
    ExtendedDivergent,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Compact => "compact",
            Phase::ExtendedFiniteY => "extended-finite-y\u{221e}",
            Phase::ExtendedDivergent => "extended-divergent",
        }
    }
}

impl Support {
    pub fn is_compact(&self) -> bool {
        matches!(self, Support::Compact { .. })
    }

    /// `"compact"`, `"extended; mass divergent"` or `"extended; mass convergent"`.
    pub fn classification(&self) -> &'static str {
        match self {
            Support::Compact { .. } => "compact",
            Support::Extended(d) if d.mass_converged => "extended; mass convergent",
            Support::Extended(_) => "extended; mass divergent",
        }
    }

    pub fn phase(&self) -> Phase {
        match self {
            Support::Compact { .. } => Phase::Compact,
            Support::Extended(ExtendedDiagnostics {
                y_limit: YLimit::Finite { .. },
                ..
            }) => Phase::ExtendedFiniteY,
            Support::Extended(_) => Phase::ExtendedDivergent,
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match self {
            Support::Compact { radius, .. } => Some(*radius),
            Support::Extended(_) => None,
        }
    }

    pub fn mass(&self) -> Option<f64> {
        match self {
            Support::Compact { mass, .. } => Some(*mass),
            Support::Extended(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
    pub event_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config: SolveConfig,
    pub ansatz: String,
    pub interp: String,
}

/// Computed profile on a grid starting at `r = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct RadialSolution {
    pub r: Vec<f64>,
    pub y: Vec<f64>,
    pub m: Vec<f64>,
    pub rho: Vec<f64>,
    pub uprime: Vec<f64>,
    pub support: Support,
    pub series: SeriesStart,
    pub stats: SolverStats,
    pub provenance: Provenance,
    pub l: f64,
    pub alpha: f64,
    pub has_cutoff: bool,
    /// Number of leading samples produced by the integrator (the rest, if
    /// any, come from [`extend_tail`]).
    pub integrated_len: usize,
    #[serde(skip)]
    dense: Vec<DenseStep<2>>,
}

impl RadialSolution {
    pub fn y0(&self) -> f64 {
        self.y[0]
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `(y, m)` from the integrator's continuous extension, for
    /// `r_s <= r <= ` end of integration.
    pub fn dense_state(&self, r: f64) -> Option<(f64, f64)> {
        let t = r.ln();
        let first = self.dense.first()?;
        let last = self.dense.last()?;
        if t < first.t0 || t > last.t1() {
            return None;
        }
        let i = self.dense.partition_point(|s| s.t1() < t).min(self.dense.len() - 1);
        let x = self.dense[i].eval(t);
        Some((x[0], x[1]))
    }

    /// Replaces `y` through `f(r, y)` and recomputes `rho` (fault injection
    /// for residual checks).
    pub fn perturbed(&self, ansatz: &AnsatzModel, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut out = self.clone();
        for i in 0..out.r.len() {
            out.y[i] = f(out.r[i], out.y[i]);
            out.rho[i] = density(ansatz, out.r[i], out.y[i])?;
        }
        Ok(out)
    }
}

fn density(ansatz: &AnsatzModel, r: f64, y: f64) -> Result<f64> {
    let l = ansatz.l();
    let g = ansatz.g(y)?;
    if r == 0.0 {
        // r^{2l} at the origin: 1, 0 or unbounded
        return Ok(if l == 0.0 {
            g
        } else if l > 0.0 || g == 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    Ok(r.powf(2.0 * l) * g)
}

const STEP_UNDERFLOW: f64 = 1e-14;
const MAX_EVENT_ITERATIONS: usize = 30;

/// Integrates from the origin to the support boundary or `r_max`.
pub fn integrate(config: &SolveConfig, ansatz: &AnsatzModel, zeta: &ZetaModel) -> Result<RadialSolution> {
    let start = series_start(config, ansatz, zeta)?;
    let tol = Tolerances {
        rel_tol: config.rel_tol,
        abs_tol: config.abs_tol,
    };
    let mut sys = Reduced {
        zeta,
        cache: ZetaCache::default(),
        g: ansatz.evaluator(),
        l: ansatz.l(),
        evaluations: 0,
    };
    let t_end = config.r_max.ln();
    if start.r >= config.r_max {
        return Err(Error::Domain(format!(
            "series start radius {:e} is beyond r_max = {:e}",
            start.r, config.r_max
        )));
    }
    let mut t = start.r.ln();
    let mut x = [start.y, start.m];
    let mut f = sys.rhs(t, &x)?;
    let mut h: f64 = 0.01;
    let mut stats = SolverStats::default();
    let mut dense: Vec<DenseStep<2>> = Vec::new();
    let mut boundary = None;
    let last_state = |t: f64, x: &[f64; 2]| LastState {
        r: t.exp(),
        y: x[0],
        m: x[1],
    };

    while t < t_end {
        if stats.accepted + stats.rejected >= config.max_steps {
            return Err(Error::TooManySteps(last_state(t, &x)));
        }
        h = h.min(t_end - t);
        if h <= STEP_UNDERFLOW * t.abs().max(1.0) {
            return Err(Error::StepUnderflow(last_state(t, &x)));
        }
        let attempt = attempt_step(&mut sys, tol, t, &x, &f, h)?;
        let finite = attempt.x1.iter().chain(&attempt.f1).all(|v| v.is_finite());
        let error = if finite { attempt.error } else { f64::INFINITY };
        if !(error <= 1.0) {
            stats.rejected += 1;
            if !finite && h * 0.1 <= STEP_UNDERFLOW * t.abs().max(1.0) {
                return Err(Error::NonFinite(last_state(t, &x)));
            }
            h = if finite { propose_step(h, error, false) } else { 0.1 * h };
            continue;
        }
        stats.accepted += 1;
        if ansatz.has_cutoff() && attempt.x1[0] <= 0.0 {
            let (t_star, step) = locate_boundary(&mut sys, tol, config, t, &x, &f, &attempt.dense, &mut stats)?;
            dense.push(step);
            boundary = Some((t_star, step.eval(t_star)[1]));
            break;
        }
        dense.push(attempt.dense);
        t += h;
        x = attempt.x1;
        f = attempt.f1;
        h = propose_step(h, error, true);
    }
    stats.rhs_evaluations = sys.evaluations;

    let t_last = boundary.map_or(t, |(tb, _)| tb);
    let mut samples = sample_points(start.r.ln(), t_last, config.grid_density, boundary.is_some());
    let mut r = vec![0.0];
    let mut y = vec![config.y0];
    let mut m = vec![0.0];
    let mut step = 0;
    for ti in samples.drain(..) {
        while step + 1 < dense.len() && dense[step].t1() < ti {
            step += 1;
        }
        let state = dense[step].eval(ti);
        r.push(ti.exp());
        y.push(state[0]);
        m.push(state[1].max(0.0));
    }
    if let Some((tb, mass)) = boundary {
        *r.last_mut().expect("non-empty") = tb.exp();
        *y.last_mut().expect("non-empty") = 0.0;
        *m.last_mut().expect("non-empty") = mass;
    }
    // m' >= 0 exactly; interpolated samples can still dip by a few ulps
    // where the density is nearly zero
    for i in (1..m.len() - 1).rev() {
        m[i] = m[i].min(m[i + 1]);
    }
    let mut rho = Vec::with_capacity(r.len());
    let mut uprime = Vec::with_capacity(r.len());
    let mut cache = ZetaCache::default();
    let mut g = ansatz.evaluator();
    for i in 0..r.len() {
        if i == 0 {
            rho.push(density(ansatz, 0.0, config.y0)?);
            uprime.push(0.0);
            continue;
        }
        rho.push(r[i].powf(2.0 * ansatz.l()) * g.g(y[i])?);
        uprime.push(zeta.eval_cached(m[i] / (r[i] * r[i]), &mut cache)?);
    }

    let mut sol = RadialSolution {
        integrated_len: r.len(),
        r,
        y,
        m,
        rho,
        uprime,
        support: Support::Compact { radius: 0.0, mass: 0.0 },
        series: start,
        stats,
        provenance: Provenance {
            config: *config,
            ansatz: ansatz.id(),
            interp: zeta.interp().id(),
        },
        l: ansatz.l(),
        alpha: zeta.alpha(),
        has_cutoff: ansatz.has_cutoff(),
        dense,
    };
    sol.support = match boundary {
        Some((tb, mass)) => Support::Compact {
            radius: tb.exp(),
            mass,
        },
        None => Support::Extended(extended_diagnostics(&sol)?),
    };
    Ok(sol)
}

/// Width in `ln r` of the region below a support boundary where samples
/// are graded geometrically towards it.
const GRADED_WIDTH: f64 = 0.1;

/// Sample times: uniform with spacing `1 / density` from `t0`, always
/// including the end. Below a support boundary the density behaves like a
/// power of the distance to it, so the spacing there shrinks in proportion
/// to that distance (the geometric ratio matches the uniform spacing at the
/// start of the graded region).
fn sample_points(t0: f64, t1: f64, density: f64, graded_end: bool) -> Vec<f64> {
    let spacing = 1.0 / density;
    let width = if graded_end { GRADED_WIDTH.min(0.5 * (t1 - t0)) } else { 0.0 };
    let uniform_end = t1 - width;
    let n = ((uniform_end - t0) / spacing).floor().max(0.0) as usize;
    let mut ts: Vec<f64> = (0..=n).map(|i| t0 + spacing * i as f64).collect();
    if graded_end && width > 0.0 {
        let q = (1.0 - spacing / width).clamp(0.5, 1.0 - 1e-6);
        let mut d = width;
        // closer samples would only resolve roundoff in m
        let floor = 1e-4 * width;
        while d > floor {
            if t1 - d > *ts.last().expect("non-empty") {
                ts.push(t1 - d);
            }
            d *= q;
        }
    }
    if ts.last().is_none_or(|&t| t < t1) {
        ts.push(t1);
    }
    ts
}

/// Finds the zero of `y` inside an accepted step and re-integrates onto it.
#[allow(clippy::too_many_arguments)]
fn locate_boundary(
    sys: &mut Reduced<'_>,
    tol: Tolerances,
    config: &SolveConfig,
    t: f64,
    x: &[f64; 2],
    f: &[f64; 2],
    dense: &DenseStep<2>,
    stats: &mut SolverStats,
) -> Result<(f64, DenseStep<2>)> {
    let last = LastState {
        r: t.exp(),
        y: x[0],
        m: x[1],
    };
    let mut t_star = brent(|s| dense.eval(s)[0], t, dense.t1(), config.event_tol * 1e-2, 200)
        .map_err(|_| Error::EventBracketing(last))?;
    for _ in 0..MAX_EVENT_ITERATIONS {
        stats.event_iterations += 1;
        let h = t_star - t;
        if h <= 0.0 {
            return Err(Error::EventBracketing(last));
        }
        let a = attempt_step(sys, tol, t, x, f, h)?;
        let dy_dt = a.f1[0];
        if !(dy_dt < 0.0) {
            return Err(Error::EventBracketing(last));
        }
        let dt = a.x1[0] / dy_dt;
        t_star -= dt;
        if dt.abs() < config.event_tol {
            let a = attempt_step(sys, tol, t, x, f, t_star - t)?;
            return Ok((t_star, a.dense));
        }
    }
    Err(Error::EventBracketing(last))
}

/// Least-squares diagnostics over the last two decades of the grid.
fn extended_diagnostics(sol: &RadialSolution) -> Result<ExtendedDiagnostics> {
    let n = sol.integrated_len;
    let r = &sol.r[1..n];
    let r_end = *r.last().ok_or_else(|| Error::InsufficientData("empty grid".into()))?;
    let r_first = r[0];
    if r_end / r_first < 100.0 || r.len() < 20 {
        return Err(Error::InsufficientData(format!(
            "extended state needs two decades of tail data (grid spans {r_first:e}..{r_end:e}); increase r_max"
        )));
    }
    let lo = r_end / 100.0;
    let m = &sol.m[1..n];
    let mass_fit = power_fit(r, m, lo, r_end);
    let rho_r3: Vec<f64> = r.iter().zip(&sol.rho[1..n]).map(|(&ri, &p)| p * ri.powi(3)).collect();
    let density_fit = power_fit(r, &rho_r3, lo, r_end);
    let mass_converged = density_fit.is_some_and(|f| f.exponent < 0.0);
    let y_at = |target: f64| -> f64 {
        let i = r.partition_point(|&ri| ri < target).min(r.len() - 1);
        sol.y[1 + i]
    };
    let y_end = sol.y[n - 1];
    let d1 = y_at(r_end / 10.0) - y_end;
    let d2 = y_at(r_end / 100.0) - y_at(r_end / 10.0);
    let ratio = d1 / d2;
    let y_limit = if ratio.is_finite() && ratio <= 0.8 {
        YLimit::Finite {
            estimate: y_end - d1 * ratio / (1.0 - ratio),
        }
    } else {
        YLimit::MinusInfinity
    };
    Ok(ExtendedDiagnostics {
        r_end,
        m_end: *m.last().expect("non-empty"),
        mass_fit,
        density_fit,
        mass_converged,
        log_slope_end: r_end * sol.uprime[n - 1],
        y_drop_ratio: ratio,
        y_limit,
    })
}

/// Re-derives the classification record of a completed solution.
pub fn classify_support(sol: &RadialSolution) -> Result<Support> {
    match &sol.support {
        Support::Compact { radius, mass } => Ok(Support::Compact {
            radius: *radius,
            mass: *mass,
        }),
        Support::Extended(_) => Ok(Support::Extended(extended_diagnostics(sol)?)),
    }
}

/// Appends vacuum samples (`rho = 0`, `m = M`, `U' = zeta(M / r^2)`) on a
/// log grid from `R` to `r_out`; `y` continues by quadrature of `-U'`.
pub fn extend_tail(
    sol: &RadialSolution,
    zeta: &ZetaModel,
    r_out: f64,
    points_per_decade: usize,
) -> Result<RadialSolution> {
    let (radius, mass) = match sol.support {
        Support::Compact { radius, mass } => (radius, mass),
        Support::Extended(_) => {
            return Err(Error::Domain("extend_tail needs a compactly supported state".into()))
        }
    };
    if !(r_out > radius) {
        return Err(Error::Domain(format!(
            "extend_tail: r_out = {r_out:e} must exceed R = {radius:e}"
        )));
    }
    let mut out = sol.clone();
    out.r.truncate(sol.integrated_len);
    out.y.truncate(sol.integrated_len);
    out.m.truncate(sol.integrated_len);
    out.rho.truncate(sol.integrated_len);
    out.uprime.truncate(sol.integrated_len);
    let decades = (r_out / radius).log10();
    let n = ((decades * points_per_decade.max(1) as f64).ceil() as usize).max(1);
    let step = (r_out / radius).ln() / n as f64;
    let mut cache = ZetaCache::default();
    let mut y = *out.y.last().expect("non-empty");
    let mut s_prev = radius.ln();
    for i in 1..=n {
        let s = if i == n { r_out.ln() } else { radius.ln() + step * i as f64 };
        let drop = tail_drop(zeta, mass, s_prev, s)?;
        y -= drop;
        let r = s.exp();
        out.r.push(r);
        out.y.push(y);
        out.m.push(mass);
        out.rho.push(0.0);
        out.uprime.push(zeta.eval_cached(mass / (r * r), &mut cache)?);
        s_prev = s;
    }
    Ok(out)
}

/// `int_{e^a}^{e^b} zeta(M / s^2) ds`, integrated in `ln s`.
pub(crate) fn tail_drop(zeta: &ZetaModel, mass: f64, a: f64, b: f64) -> Result<f64> {
    let mut cache = ZetaCache::default();
    let mut failure = None;
    let q = gauss_kronrod(
        |u| {
            let s = u.exp();
            match zeta.eval_cached(mass / (s * s), &mut cache) {
                Ok(v) => s * v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        a,
        b,
        0.0,
        1e-13,
        200,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(q.value),
    }
}
