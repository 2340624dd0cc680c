//! Command-line driver for band spectra and thermal free energies of combs.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod validate;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{Format, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "comb-thermo", version, about = "Finite-temperature Casimir free energy of 1-D combs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; overrides `output.path`. Standard output when neither is set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; overrides `output.format`.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Worker threads for sweeps.
    #[arg(long, env = "COMB_THERMO_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Band edges `n, omega_min, omega_max`.
    Bands(Common),
    /// Quasi-momentum and density of states on a frequency grid.
    Dos(Common),
    /// Thermal free energy per cell.
    FreeEnergy(Common),
    /// Entropy per cell.
    Entropy {
        #[command(flatten)]
        common: Common,
        /// Add a finite-difference entropy column.
        #[arg(long)]
        check_fd: bool,
    },
    /// Free energy or entropy over an `(Omega, gamma)` rectangle.
    Sweep(Common),
    /// Free energy and entropy of one isolated defect.
    Single(Common),
    /// Invariant battery with a pass/fail table.
    Validate(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Self::Bands(c)
            | Self::Dos(c)
            | Self::FreeEnergy(c)
            | Self::Sweep(c)
            | Self::Single(c)
            | Self::Validate(c) => c,
            Self::Entropy { common, .. } => common,
        }
    }
}

fn emit(table: &output::Table, cfg: &RunConfig, common: &Common) -> Result<(), CliError> {
    let format = match common.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => cfg.output.format,
    };
    let path = common.out.as_deref().or(cfg.output.path.as_deref());
    table.emit(format, path)
}

/// Default worker count: the machine's available parallelism.
fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    let cfg = RunConfig::load(&common.config)?;
    let table = match &cli.command {
        Command::Bands(_) => commands::bands(&cfg)?,
        Command::Dos(_) => commands::dos(&cfg)?,
        Command::FreeEnergy(_) => commands::free_energy(&cfg)?,
        Command::Entropy { check_fd, .. } => commands::entropy_table(&cfg, *check_fd)?,
        Command::Single(_) => commands::single(&cfg)?,
        Command::Sweep(_) => {
            if common.workers == Some(0) {
                return Err(CliError::config("--workers must be at least 1"));
            }
            let workers = common.workers.unwrap_or_else(default_workers);
            let (table, failure) = commands::sweep(&cfg, workers)?;
            emit(&table, &cfg, common)?;
            return failure.map_or(Ok(()), Err);
        }
        Command::Validate(_) => {
            let checks = validate::battery(&cfg.comb()?, &cfg.tolerances());
            let table = validate::report(&checks);
            emit(&table, &cfg, common)?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
            if failed.is_empty() {
                return Ok(());
            }
            return Err(CliError::numeric(format!("failed checks: {}", failed.join(", "))));
        }
    };
    emit(&table, &cfg, common)
}
