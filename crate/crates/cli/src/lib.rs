//! Command-line front end: experiment configs in, verification reports and
//! plot data out.
//!
//! Exit codes: 0 when every required check passes, 1 when one fails, 2 for
//! input or configuration errors.

pub mod checks;
pub mod config;
pub mod demo;
pub mod error;
pub mod report;
pub mod suite;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::{Experiment, Overrides};
use crate::error::{CliError, Result};
use crate::report::{Environment, VerificationReport};

#[derive(Debug, Parser)]
#[command(name = "kwh", version, about = "K-frame analysis of Gabor systems on finite grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the PSD and verdict tolerances.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Overrides the relative rank threshold.
    #[arg(long)]
    pub rank_threshold: Option<f64>,
    /// Writes the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            tol: self.tol,
            rank_threshold: self.rank_threshold,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal K-frame constants and the operator-inequality test.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the named checks (or all of them with --all).
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// douglas, range, sufficient, necessary, image, transform, restricted, density, bessel
        checks: Vec<String>,
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Runs a canned demonstration: block-basis, douglas or sandwich.
    Demo {
        name: String,
        #[arg(long)]
        plot_dir: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the seeded property suite.
    Suite {
        #[arg(long, default_value_t = suite::DEFAULT_SIZE_CAP)]
        size_cap: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn report_for(command: &str, exp: &Experiment, records: Vec<report::Record>, start: Instant) -> VerificationReport {
    let mut env = Environment::new(command, exp.config.seed, exp.tolerances());
    env.grid = Some(exp.grid.sizes().to_vec());
    env.config_hash = Some(exp.config.hash());
    VerificationReport::new(env, records, start.elapsed().as_secs_f64() * 1e3)
}

pub fn cmd_analyze(config: &std::path::Path, overrides: &Overrides) -> Result<VerificationReport> {
    let start = Instant::now();
    let exp = Experiment::from_path(config, overrides)?;
    let records = checks::analyze(&exp)?;
    Ok(report_for("analyze", &exp, records, start))
}

pub fn cmd_verify(
    config: &std::path::Path,
    names: &[String],
    all: bool,
    overrides: &Overrides,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let exp = Experiment::from_path(config, overrides)?;
    let selected: Vec<&str> = if all {
        checks::CHECKS.to_vec()
    } else {
        names.iter().map(String::as_str).collect()
    };
    if selected.is_empty() {
        return Err(CliError::Config("no checks selected; name some or pass --all".into()));
    }
    if let Some(bad) = selected.iter().find(|n| !checks::CHECKS.contains(n)) {
        return Err(CliError::UnknownCheck((*bad).into()));
    }
    let mut records = Vec::new();
    for name in selected {
        records.extend(checks::run_check(&exp, name, exp.config.seed, all)?);
    }
    Ok(report_for("verify", &exp, records, start))
}

fn emit(report: &VerificationReport, out: Option<&PathBuf>) -> Result<()> {
    let text = report.to_json();
    match out {
        Some(path) => fs::write(path, text + "\n").map_err(|e| CliError::io(path, e)),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let (report, out) = match &cli.command {
        Command::Analyze { config, common } => (cmd_analyze(config, &common.overrides())?, common.out.clone()),
        Command::Verify {
            config,
            checks,
            all,
            common,
        } => (cmd_verify(config, checks, *all, &common.overrides())?, common.out.clone()),
        Command::Demo { name, plot_dir, common } => (
            demo::run_demo(name, common.seed.unwrap_or(0), plot_dir.as_deref())?,
            common.out.clone(),
        ),
        Command::Suite { size_cap, common } => {
            (suite::run_suite(common.seed.unwrap_or(0), *size_cap), common.out.clone())
        }
    };
    emit(&report, out.as_ref())?;
    Ok(report.exit_code())
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
