use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ccrlab_core::scenarios::{
    convergence_sweep, run_scenario, validate, ScenarioConfig, ScenarioName, ScenarioReport,
};
use ccrlab_core::LabError;
use clap::{Parser, Subcommand};

/// Representations of the canonical commutation relations, simulated.
#[derive(Parser, Debug)]
#[command(name = "ccrlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one named scenario.
    Run {
        /// infinity, berezin, reducible-brute, reducible-limit or single-mode
        #[arg(long)]
        scenario: String,
        /// TOML config; defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (falls back to `output_dir` in the config, then `.`)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the finite-N vs limit trace distance over N and t.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full invariant suite.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report files here
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const EXIT_FAIL: u8 = 1;

fn load(config: Option<&Path>) -> Result<ScenarioConfig, LabError> {
    match config {
        Some(path) => ScenarioConfig::from_file(path),
        None => Ok(ScenarioConfig::default()),
    }
}

fn out_dir(cli: Option<PathBuf>, cfg: &ScenarioConfig) -> PathBuf {
    cli.or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn execute(command: Command) -> Result<(ScenarioReport, Option<PathBuf>), LabError> {
    match command {
        Command::Run {
            scenario,
            config,
            out,
        } => {
            let name: ScenarioName = scenario.parse()?;
            let mut cfg = load(config.as_deref())?;
            cfg.scenario = Some(name.as_str().to_string());
            let dir = out_dir(out, &cfg);
            Ok((run_scenario(&cfg)?, Some(dir)))
        }
        Command::Sweep { config, out } => {
            let cfg = load(config.as_deref())?;
            let dir = out_dir(out, &cfg);
            Ok((convergence_sweep(&cfg)?, Some(dir)))
        }
        Command::Validate { seed, out } => Ok((validate(seed), out)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok((report, dir)) => {
            if let Some(dir) = dir {
                if let Err(e) = report.write(&dir) {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code());
                }
            }
            print!("{}", report.summary());
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
