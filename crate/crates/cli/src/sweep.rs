//! Cross-product parameter sweeps executed on a worker pool.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde_json::Value;

use crate::config::{Models, RawConfig, RunConfig};
use crate::run::{compute, write_outputs, Summary};
use crate::CliError;

/// One sweep axis: a config key and the values it takes.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    /// Name as written in the axes file.
    pub name: String,
    /// Config key it overrides.
    pub key: String,
    pub values: Vec<String>,
}

fn axis_key(name: &str) -> Option<&'static str> {
    Some(match name {
        "alpha" | "interp.alpha" => "interp.alpha",
        "k" | "ansatz.k" => "ansatz.k",
        "l" | "ansatz.l" => "ansatz.l",
        "y0" | "solve.y0" => "solve.y0",
        "ansatz.kind" | "kind" => "ansatz.kind",
        _ => return None,
    })
}

/// Parses `name = v1, v2, ...` lines; axes are crossed in file order.
pub fn parse_axes(text: &str) -> Result<Vec<Axis>, CliError> {
    let mut axes: Vec<Axis> = Vec::new();
    let mut errors = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((name, list)) = line.split_once('=') else {
            errors.push(format!("axes line {}: expected `name = v1, v2, ...`", n + 1));
            continue;
        };
        let name = name.trim();
        let Some(key) = axis_key(name) else {
            errors.push(format!(
                "axes line {}: `{name}` is not a sweep axis (alpha, k, l, y0, ansatz.kind)",
                n + 1
            ));
            continue;
        };
        if axes.iter().any(|a| a.key == key) {
            errors.push(format!("axes line {}: axis `{name}` given twice", n + 1));
            continue;
        }
        let values: Vec<String> = list.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            errors.push(format!("axes line {}: axis `{name}` has no values", n + 1));
            continue;
        }
        axes.push(Axis {
            name: name.to_string(),
            key: key.to_string(),
            values,
        });
    }
    if errors.is_empty() {
        Ok(axes)
    } else {
        Err(CliError::Config(errors))
    }
}

/// Number of rows of the cross product (saturating).
pub fn run_count(axes: &[Axis]) -> usize {
    axes.iter().fold(1usize, |n, a| n.saturating_mul(a.values.len()))
}

/// Row `index` of the cross product, last axis fastest.
fn row_values(axes: &[Axis], mut index: usize) -> Vec<&str> {
    let mut out = vec![""; axes.len()];
    for (i, a) in axes.iter().enumerate().rev() {
        out[i] = &a.values[index % a.values.len()];
        index /= a.values.len();
    }
    out
}

pub struct RowResult {
    pub values: Vec<String>,
    pub outcome: Result<Summary, String>,
}

fn run_row(base: &RawConfig, axes: &[Axis], values: &[&str], dir: &Path) -> Result<Summary, CliError> {
    let mut raw = base.clone();
    for (a, v) in axes.iter().zip(values) {
        raw.set(&a.key, v);
        // sweeping alpha on a newtonian base switches to the simple family
        if a.key == "interp.alpha" && raw.get("interp.family") == Some("newtonian") {
            raw.set("interp.family", "simple");
        }
    }
    raw.set("output.dir", &dir.to_string_lossy());
    let cfg = RunConfig::from_raw(&raw)?;
    let models = Models::build(&cfg)?;
    let out = compute(&cfg, &models)?;
    write_outputs(dir, &cfg, &out)?;
    Ok(out.summary)
}

pub const SUMMARY_COLUMNS: &str =
    "status,classification,phase,R,M,E0,S,v_flat,tully_fisher_ratio,mass_exponent,error";

fn cell(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:e}"))
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

pub fn summary_table(axes: &[Axis], rows: &[RowResult]) -> String {
    let mut out = String::from("run");
    for a in axes {
        let _ = write!(out, ",{}", a.name);
    }
    let _ = writeln!(out, ",{SUMMARY_COLUMNS}");
    for (i, row) in rows.iter().enumerate() {
        let _ = write!(out, "{i}");
        for v in &row.values {
            let _ = write!(out, ",{}", csv_escape(v));
        }
        match &row.outcome {
            Ok(s) => {
                let energy = match &s.s {
                    Value::Number(n) => n.as_f64().map_or(String::new(), |x| format!("{x:e}")),
                    Value::String(t) => t.clone(),
                    _ => String::new(),
                };
                let _ = writeln!(
                    out,
                    ",ok,{},{},{},{},{:e},{},{},{},{},",
                    csv_escape(&s.classification),
                    s.phase,
                    cell(s.radius),
                    cell(s.mass),
                    s.e0,
                    energy,
                    cell(s.v_flat),
                    cell(s.tully_fisher_ratio),
                    cell(s.fit_exponents.mass.map(|f| f.exponent)),
                );
            }
            Err(msg) => {
                let _ = writeln!(out, ",failed,,,,,,,,,,{}", csv_escape(msg));
            }
        }
    }
    out
}

/// `sweep <config> --axes <file>`: one subdirectory per row plus
/// `sweep_summary.csv`. Row failures are recorded, never fatal.
pub fn run_sweep(base: &RawConfig, axes: &[Axis]) -> Result<Vec<RowResult>, CliError> {
    // the base configuration must be valid on its own
    let cfg = RunConfig::from_raw(base)?;
    let total = run_count(axes);
    if total > cfg.max_runs {
        return Err(CliError::Config(vec![format!(
            "sweep has {total} runs, more than sweep.max_runs = {}",
            cfg.max_runs
        )]));
    }
    let root = cfg.output.dir.clone();
    fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
    let width = (total.max(1) - 1).to_string().len().max(4);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<RowResult> = pool.install(|| {
        (0..total)
            .into_par_iter()
            .map(|i| {
                let values = row_values(axes, i);
                let dir = root.join(format!("run_{i:0width$}"));
                let outcome = run_row(base, axes, &values, &dir).map_err(|e| e.to_string());
                RowResult {
                    values: values.iter().map(|v| v.to_string()).collect(),
                    outcome,
                }
            })
            .collect()
    });
    let path = root.join("sweep_summary.csv");
    fs::write(&path, summary_table(axes, &rows)).map_err(|e| CliError::io(&path, e))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_product_order() {
        let axes = parse_axes("alpha = 0, 1\nk = 1, 3, 4\n").unwrap();
        assert_eq!(run_count(&axes), 6);
        assert_eq!(row_values(&axes, 0), vec!["0", "1"]);
        assert_eq!(row_values(&axes, 1), vec!["0", "3"]);
        assert_eq!(row_values(&axes, 5), vec!["1", "4"]);
    }

    #[test]
    fn empty_axes_is_one_run() {
        let axes = parse_axes("# nothing\n\n").unwrap();
        assert_eq!(run_count(&axes), 1);
        assert!(row_values(&axes, 0).is_empty());
    }

    #[test]
    fn bad_axes_are_listed() {
        match parse_axes("temperature = 1\nk =\nk = 1\nk = 2\n") {
            Err(CliError::Config(e)) => assert_eq!(e.len(), 3, "{e:?}"),
            _ => panic!(),
        }
    }

    #[test]
    fn csv_cells_are_quoted() {
        assert_eq!(csv_escape("extended; mass divergent"), "extended; mass divergent");
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
    }
}
