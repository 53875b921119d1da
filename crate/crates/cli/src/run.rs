//! Single solves: integration, observables, profile and summary files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use mond_equilibria::numeric::fit::PowerFit;
use mond_equilibria::observables::{compute_observables, EnergyGrowth, ObservableOptions, ObservableSet};
use mond_equilibria::solver::{integrate, RadialSolution, SeriesStart, SolverStats, Support};
use mond_equilibria::zeta::ZetaModel;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Models, RunConfig};
use crate::CliError;

pub const PROFILE_HEADER: &str = "r,y,m,rho,uprime,U,vcirc";

/// MOND acceleration scale in m/s^2 and Newton's constant in SI units.
const A0: f64 = 1.2e-10;
const G_SI: f64 = 6.674_30e-11;

#[derive(Debug, Clone, Serialize)]
pub struct FitExponents {
    pub uprime: Option<PowerFit>,
    pub abs_potential: Option<PowerFit>,
    pub mass: Option<PowerFit>,
    pub density_r3: Option<PowerFit>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub series_start: SeriesStart,
    pub stats: SolverStats,
    pub grid_points: usize,
    pub interp: String,
    pub ansatz: String,
    pub y_drop_ratio: Option<f64>,
    pub y_limit_estimate: Option<f64>,
    pub u_over_log_r: Option<f64>,
    pub log_slope_end: f64,
    pub energy_decade_ratios: Vec<f64>,
    pub energy_error: Option<String>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub classification: String,
    pub phase: String,
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    #[serde(rename = "M")]
    pub mass: Option<f64>,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub cutoff_convention: String,
    /// Field energy, or `"divergent(log)"`.
    #[serde(rename = "S")]
    pub s: Value,
    pub v_flat: Option<f64>,
    pub tully_fisher_ratio: Option<f64>,
    pub fit_exponents: FitExponents,
    pub solver: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physical: Option<Value>,
}

pub struct RunOutput {
    pub summary: Summary,
    pub observables: ObservableSet,
}

/// Integrates and derives observables without touching the filesystem.
pub fn compute(cfg: &RunConfig, models: &Models) -> Result<RunOutput, CliError> {
    let zeta = ZetaModel::new(models.interp.clone());
    let sol = integrate(&cfg.solve, &models.ansatz, &zeta).map_err(CliError::numerical)?;
    let options = ObservableOptions {
        convention: cfg.cutoff,
        tail_factor: cfg.output.tail_factor,
        ..ObservableOptions::default()
    };
    let obs = compute_observables(&sol, &zeta, &options).map_err(CliError::numerical)?;
    let summary = summarize(cfg, &sol, &obs);
    Ok(RunOutput {
        summary,
        observables: obs,
    })
}

fn summarize(cfg: &RunConfig, sol: &RadialSolution, obs: &ObservableSet) -> Summary {
    let (s, ratios, energy_error) = match &obs.energy {
        Ok(e) => (
            match e.growth {
                EnergyGrowth::Convergent => json!(e.value),
                EnergyGrowth::LogDivergent => json!("divergent(log)"),
            },
            e.ratios.clone(),
            None,
        ),
        Err(msg) => (Value::Null, Vec::new(), Some(msg.clone())),
    };
    let (mass_fit, density_fit, drop_ratio, y_limit) = match &sol.support {
        Support::Extended(d) => (
            d.mass_fit,
            d.density_fit,
            Some(d.y_drop_ratio),
            match d.y_limit {
                mond_equilibria::solver::YLimit::Finite { estimate } => Some(estimate),
                mond_equilibria::solver::YLimit::MinusInfinity => None,
            },
        ),
        Support::Compact { .. } => (None, None, None, None),
    };
    let physical = cfg.output.mass_unit_kg.map(|m_unit| {
        // code units: G = a0 = 1, mass unit chosen by the user
        let length = (G_SI * m_unit / A0).sqrt();
        let velocity = (G_SI * m_unit * A0).powf(0.25);
        json!({
            "a0_m_s2": A0,
            "mass_unit_kg": m_unit,
            "length_unit_m": length,
            "velocity_unit_m_s": velocity,
            "R_m": sol.support.radius().map(|r| r * length),
            "M_kg": sol.support.mass().map(|m| m * m_unit),
            "v_flat_m_s": obs.rotation.v_flat.map(|v| v * velocity),
        })
    });
    Summary {
        classification: sol.support.classification().to_string(),
        phase: sol.support.phase().as_str().to_string(),
        radius: sol.support.radius(),
        mass: sol.support.mass(),
        e0: obs.potential.e0,
        cutoff_convention: cfg.cutoff.as_str().to_string(),
        s,
        v_flat: obs.rotation.v_flat,
        tully_fisher_ratio: obs.rotation.tully_fisher_ratio,
        fit_exponents: FitExponents {
            uprime: obs.asymptotics.uprime_fit,
            abs_potential: obs.asymptotics.potential_fit,
            mass: mass_fit,
            density_r3: density_fit,
        },
        solver: Diagnostics {
            series_start: sol.series,
            stats: sol.stats,
            grid_points: sol.len(),
            interp: sol.provenance.interp.clone(),
            ansatz: sol.provenance.ansatz.clone(),
            y_drop_ratio: drop_ratio,
            y_limit_estimate: y_limit,
            u_over_log_r: obs.asymptotics.u_over_log_r,
            log_slope_end: obs.asymptotics.log_slope_end,
            energy_decade_ratios: ratios,
            energy_error,
        },
        physical,
    }
}

/// Profile rows on the solver grid (with vacuum tail).
pub fn profile_csv(obs: &ObservableSet) -> String {
    let s = &obs.extended;
    let mut out = String::with_capacity(64 * s.len());
    out.push_str(PROFILE_HEADER);
    out.push('\n');
    for i in 0..s.len() {
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            s.r[i], s.y[i], s.m[i], s.rho[i], s.uprime[i], obs.potential.u[i], obs.rotation.v[i]
        );
    }
    out
}

/// `rows` uniformly spaced radii on `[0, r_end]` of the integrated
/// region, every column linearly interpolated.
pub fn resampled_csv(obs: &ObservableSet, rows: usize) -> String {
    let s = &obs.extended;
    let n = s.integrated_len;
    let r_end = s.r[n - 1];
    let cols: [&[f64]; 6] = [&s.y, &s.m, &s.rho, &s.uprime, &obs.potential.u, &obs.rotation.v];
    let mut out = String::new();
    out.push_str(PROFILE_HEADER);
    out.push('\n');
    let rows = rows.max(2);
    for k in 0..rows {
        let r = r_end * k as f64 / (rows - 1) as f64;
        let j = s.r[..n].partition_point(|&x| x < r).clamp(1, n - 1);
        let w = (r - s.r[j - 1]) / (s.r[j] - s.r[j - 1]);
        let _ = write!(out, "{r:e}");
        for c in cols {
            let v = if k == 0 { c[0] } else { c[j - 1] + w * (c[j] - c[j - 1]) };
            let _ = write!(out, ",{v:e}");
        }
        out.push('\n');
    }
    out
}

pub fn write_outputs(dir: &Path, cfg: &RunConfig, out: &RunOutput) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let write = |name: &str, text: String| {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| CliError::io(&p, e))
    };
    write("profile.csv", profile_csv(&out.observables))?;
    if cfg.output.resample > 0 {
        write("profile_resampled.csv", resampled_csv(&out.observables, cfg.output.resample))?;
    }
    let json = serde_json::to_string_pretty(&out.summary).expect("summary serializes");
    write("summary.json", json + "\n")
}

/// `solve <config>`: one run, files under `output.dir`.
pub fn run_solve(cfg: &RunConfig) -> Result<Summary, CliError> {
    let models = Models::build(cfg)?;
    let out = compute(cfg, &models)?;
    write_outputs(&cfg.output.dir, cfg, &out)?;
    Ok(out.summary)
}
