use std::process::ExitCode;

use clap::Parser;
use hubnet_cli::args::Cli;

fn main() -> ExitCode {
    match hubnet_cli::run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hubnet: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
