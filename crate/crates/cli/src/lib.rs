//! Command-line front end for the Kepler-Ermakov laboratory.
//!
//! Four commands share one JSON configuration format ([`config::RunConfig`]):
//! `list` prints the system registry, `simulate` writes a trajectory CSV and a
//! manifest, `check` runs a numerical certificate and `sweep` tabulates drift
//! over a parameter grid. Exit codes are 0 on success, 1 for configuration
//! errors, 2 for numeric failures and 3 for failed checks.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::check::CheckKind;
pub use config::{Overrides, RunConfig};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "kelab", version, about = "Simulate and certify Kepler-Ermakov systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List catalog systems, their parameters and invariants.
    List {
        /// Only systems whose name contains this text.
        filter: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Integrate one trajectory and write CSV plus manifest.
    Simulate(RunArgs),
    /// Run a numerical certificate and write a JSON report.
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Tabulate results over a parameter grid.
    Sweep(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// System name; overrides the configuration (`all` for the oracle check).
    #[arg(long)]
    pub system: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Integrator tolerance (absolute and relative).
    #[arg(long)]
    pub tol: Option<f64>,
}

impl RunArgs {
    pub fn load(&self) -> CliResult<RunConfig> {
        let cfg = match &self.config {
            Some(p) => RunConfig::from_path(p)?,
            None => RunConfig::default(),
        };
        let ov = Overrides { system: self.system.clone(), seed: self.seed, tol: self.tol, out: self.out.clone() };
        Ok(cfg.with_overrides(&ov))
    }
}

/// Execute a parsed command, writing progress to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::List { filter, json } => commands::list::run(filter.as_deref(), *json, out),
        Command::Simulate(a) => commands::simulate::run(&a.load()?, out),
        Command::Check { kind, args } => commands::check::run(*kind, &args.load()?, out),
        Command::Sweep(a) => commands::sweep::run(&a.load()?, out),
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 1;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
