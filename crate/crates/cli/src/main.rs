use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mond_cli::config::{RawConfig, RunConfig};
use mond_cli::{run, sweep, validate, CliError, EXIT_VALIDATION_FAILED};

#[derive(Parser)]
#[command(name = "mondeq", version, about = "Steady states of self-gravitating systems under MOND")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and write profile.csv and summary.json
    Solve { config: PathBuf },
    /// Run the cross product of the axes file over a base configuration
    Sweep {
        config: PathBuf,
        #[arg(long)]
        axes: PathBuf,
    },
    /// Run the oracle suite
    Validate {
        /// Include the table-based models named in this configuration
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "validation_report.json")]
        report: PathBuf,
    },
}

fn solve(config: &PathBuf) -> Result<(), CliError> {
    let cfg = RunConfig::from_raw(&RawConfig::load(config)?)?;
    let s = run::run_solve(&cfg)?;
    println!(
        "{}: R = {}, M = {} -> {}",
        s.classification,
        s.radius.map_or("-".into(), |r| format!("{r:.10e}")),
        s.mass.map_or("-".into(), |m| format!("{m:.10e}")),
        cfg.output.dir.display()
    );
    Ok(())
}

fn sweep(config: &PathBuf, axes: &PathBuf) -> Result<(), CliError> {
    let base = RawConfig::load(config)?;
    let text = std::fs::read_to_string(axes)
        .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", axes.display())]))?;
    let axes = sweep::parse_axes(&text)?;
    let rows = sweep::run_sweep(&base, &axes)?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    println!("{} runs, {failed} failed", rows.len());
    for (i, r) in rows.iter().enumerate() {
        if let Err(msg) = &r.outcome {
            eprintln!("run {i} ({}): {msg}", r.values.join(", "));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { config } => solve(config),
        Command::Sweep { config, axes } => sweep(config, axes),
        Command::Validate { config, report } => match validate::run_validate(config.as_deref(), report) {
            Ok(rep) => {
                for c in &rep.checks {
                    println!(
                        "{} {}: {:.3e} (threshold {:.1e}) {}",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.value,
                        c.threshold,
                        c.detail
                    );
                }
                if !rep.passed {
                    return ExitCode::from(EXIT_VALIDATION_FAILED);
                }
                Ok(())
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
