//! Command-line front end of `hardylab`: scenario configuration, orchestration of
//! audits, verifications, sweeps, minimizations and oracles, and deterministic
//! CSV, JSON and SVG reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod config;
pub mod plot;
pub mod presets;
pub mod report;
pub mod run;

pub use config::{load_config, parse_config, validate, Action, ConfigFile, Scenario, ScenarioConfig, Theorem};
pub use run::{run, RunOptions, RunSummary};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Verified = 0,
    Violated = 1,
    ConfigError = 2,
    NumericalFailure = 3,
}

/// Errors that stop a run before any verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Every problem found in the configuration.
    Config(Vec<String>),
    Io(String),
    Plot(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(problems) => {
                writeln!(f, "configuration error ({} problem(s)):", problems.len())?;
                for p in problems {
                    writeln!(f, "  - {p}")?;
                }
                Ok(())
            }
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
            CliError::Plot(msg) => write!(f, "plot error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_status(&self) -> ExitStatus {
        ExitStatus::ConfigError
    }
}

#[derive(Debug, Parser)]
#[command(name = "hardylab", version, about = "Numerical verification of sharp Hardy inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate s, c, G and the first zero of each model to basis.csv.
    Basis(Common),
    /// Audit curvature conditions and assumptions.
    Audit(Common),
    /// Evaluate quotients of fixed test functions.
    Verify(Common),
    /// Run the almost-extremal sweeps.
    Sweep(Common),
    /// Minimize the Rayleigh quotient over spline spaces.
    Minimize(Common),
    /// Run the random test-function oracle.
    Oracle(Common),
    /// Run every action each scenario requests.
    All(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML scenario file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in preset; repeatable. Without --config or --preset every preset runs.
    #[arg(long = "preset", value_name = "NAME")]
    pub presets: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "hardylab-out")]
    pub out: PathBuf,
    /// Seed overriding every scenario's oracle seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Write SVG plots of the sweeps.
    #[arg(long)]
    pub plot: bool,
}

impl Command {
    fn parts(&self) -> (&Common, Option<Vec<Action>>) {
        match self {
            Command::Basis(c) => (c, None),
            Command::Audit(c) => (c, Some(vec![Action::Audit])),
            Command::Verify(c) => (c, Some(vec![Action::Verify])),
            Command::Sweep(c) => (c, Some(vec![Action::Sweep])),
            Command::Minimize(c) => (c, Some(vec![Action::Minimize])),
            Command::Oracle(c) => (c, Some(vec![Action::Oracle])),
            Command::All(c) => (c, Some(Action::ALL.to_vec())),
        }
    }
}

/// Scenarios selected by `--config` and `--preset`; all presets if neither is given.
pub fn select_scenarios(common: &Common) -> Result<Vec<Scenario>, CliError> {
    let mut configs = Vec::new();
    let mut problems = Vec::new();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        configs.extend(parse_config(&text)?.scenarios);
    }
    for name in &common.presets {
        match presets::preset(name) {
            Some(list) => configs.extend(list),
            None => problems.push(format!(
                "unknown preset '{name}'; known presets: {}",
                presets::PRESET_NAMES.join(", ")
            )),
        }
    }
    if common.config.is_none() && common.presets.is_empty() {
        configs = presets::all_presets();
    }
    match validate(configs) {
        Ok(s) if problems.is_empty() => Ok(s),
        Ok(_) => Err(CliError::Config(problems)),
        Err(CliError::Config(more)) => {
            problems.extend(more);
            Err(CliError::Config(problems))
        }
        Err(e) => Err(e),
    }
}

/// Executes a parsed command line and returns the exit status.
pub fn execute(cli: &Cli) -> ExitStatus {
    let (common, actions) = cli.command.parts();
    let result = select_scenarios(common).and_then(|scenarios| match actions {
        None => run::write_basis(&scenarios, &common.out).map(|()| ExitStatus::Verified),
        Some(actions) => {
            let opts = RunOptions {
                actions,
                jobs: common.jobs,
                seed: common.seed,
                out: common.out.clone(),
                plot: common.plot,
            };
            let summary = run(&scenarios, &opts)?;
            for s in &summary.scenarios {
                for a in &s.actions {
                    println!("{:<36} {:<9} {:?}: {}", s.name, a.action.to_string(), a.status, a.detail);
                }
            }
            Ok(match summary.exit_code {
                0 => ExitStatus::Verified,
                1 => ExitStatus::Violated,
                2 => ExitStatus::ConfigError,
                _ => ExitStatus::NumericalFailure,
            })
        }
    });
    result.unwrap_or_else(|e| {
        eprint!("{e}");
        if !matches!(e, CliError::Config(_)) {
            eprintln!();
        }
        e.exit_status()
    })
}
