//! `validate`: the oracle suite, optionally including the models named in
//! a configuration file.

use std::fs;
use std::path::Path;

use mond_equilibria::validation::{run_validation, ValidationInputs, ValidationReport};

use crate::config::{InterpSpec, RawConfig, RunConfig};
use crate::CliError;

/// Adds the user's table-based models. Load failures become failing checks.
fn inputs_from_config(cfg: &RunConfig) -> ValidationInputs {
    let mut inputs = ValidationInputs::default();
    if let InterpSpec::Table { path, .. } = &cfg.interp {
        let name = format!("table:{}", path.display());
        inputs
            .interps
            .push((name, cfg.build_interp().map_err(|e| config_error(&e))));
    }
    if let crate::config::AnsatzSpec::PhiTable { path, .. } = &cfg.ansatz {
        let name = format!("phi-table:{}", path.display());
        inputs
            .ansatzes
            .push((name, cfg.build_ansatz().map_err(|e| config_error(&e))));
    }
    inputs
}

fn config_error(e: &CliError) -> mond_equilibria::Error {
    mond_equilibria::Error::Domain(e.to_string())
}

pub fn run_validate(config: Option<&Path>, report: &Path) -> Result<ValidationReport, CliError> {
    let inputs = match config {
        Some(p) => inputs_from_config(&RunConfig::from_raw(&RawConfig::load(p)?)?),
        None => ValidationInputs::default(),
    };
    let result = run_validation(inputs);
    let json = serde_json::to_string_pretty(&result).expect("report serializes");
    if let Some(parent) = report.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(report, json + "\n").map_err(|e| CliError::io(report, e))?;
    Ok(result)
}
