use std::process::ExitCode;

use clap::Parser;

use comb_thermo::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("comb-thermo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
