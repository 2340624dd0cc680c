use std::fmt;

use comb_thermo_core::bands::BandError;
use comb_thermo_core::numerics::QuadError;
use comb_thermo_core::scattering::ScatteringError;
use comb_thermo_core::thermo::ThermoError;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or physically invalid configuration (exit 2).
    Config(String),
    /// Numerical failure or failed check (exit 3).
    Numeric(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Self::Numeric(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ScatteringError> for CliError {
    fn from(e: ScatteringError) -> Self {
        Self::config(e.to_string())
    }
}

impl From<BandError> for CliError {
    fn from(e: BandError) -> Self {
        Self::numeric(e.to_string())
    }
}

impl From<ThermoError> for CliError {
    fn from(e: ThermoError) -> Self {
        Self::numeric(e.to_string())
    }
}

impl From<QuadError> for CliError {
    fn from(e: QuadError) -> Self {
        Self::numeric(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::numeric(format!("output: {e}"))
    }
}
