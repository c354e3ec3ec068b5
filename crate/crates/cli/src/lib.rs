//! Command-line front end: regenerates the bias tables and sampling
//! distributions as CSV and runs the error-control experiments.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{Context, Report};
use crate::config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("property check failed: {}", .0.join("; "))]
    PropertyFail(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::PropertyFail(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "accbias",
    version,
    about = "Accumulation bias in meta-analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config file
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of simulated series.
    #[arg(long, global = true)]
    pub reps: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory; overrides the config file.
    #[arg(long, global = true, env = "ACCBIAS_OUT")]
    pub out: Option<PathBuf>,
    /// Print nothing but errors
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Expected Z-scores under the null (analytic and simulated).
    Table1,
    /// Inflated type-I error rates of the conventional Z-test.
    Table2,
    /// Histogram densities of the meta-analysis Z-scores.
    Figure2,
    /// Surviving error rates of the Z-test and LR rule for every policy.
    BoundSuite,
    /// Tally the configured policy and decision rule.
    Simulate,
    /// Print the closed-form Gold Rush quantities.
    Analytic,
    /// Check closed forms against independent computations.
    Selftest,
}

/// Loads the config and applies the `--seed` and `--reps` overrides.
pub fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    if let Some(reps) = cli.reps {
        cfg.sim.replications = reps;
    }
    if cli.threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    cfg.check()?;
    Ok(cfg)
}

pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let cfg = effective_config(cli)?;
    let ctx = Context {
        out_dir: commands::output_dir(&cfg, cli.out.as_deref()),
        threads: cli.threads,
        quiet: cli.quiet,
    };
    let run = match cli.command {
        Command::Table1 => commands::table1,
        Command::Table2 => commands::table2,
        Command::Figure2 => commands::figure2,
        Command::BoundSuite => commands::bound_suite,
        Command::Simulate => commands::simulate,
        Command::Analytic => commands::analytic,
        Command::Selftest => commands::selftest,
    };
    run(&cfg, &ctx)
}

/// Runs the parsed command line, prints its report and returns the exit
/// code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(report) => {
            if !cli.quiet {
                for line in &report.lines {
                    println!("{line}");
                }
                for path in &report.outputs {
                    println!("wrote {}", path.display());
                }
            }
            if report.failures.is_empty() {
                0
            } else {
                let err = CliError::PropertyFail(report.failures);
                eprintln!("accbias: {err}");
                err.exit_code()
            }
        }
        Err(err) => {
            eprintln!("accbias: {err}");
            err.exit_code()
        }
    }
}
