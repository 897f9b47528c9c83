//! Command-line front end for the hub-model library: file formats,
//! configuration and one function per subcommand.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use args::{Cli, Command};
use config::Config;
use error::{CliError, CliResult};

/// Runs a parsed command line on a pool of `--jobs` threads.
pub fn run(cli: Cli) -> CliResult<()> {
    let cfg = Config::load(cli.config.as_deref())?;
    let jobs: Option<usize> = cfg.pick(cli.jobs, "jobs")?;
    if jobs == Some(0) {
        return Err(CliError::invalid("--jobs must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::invalid(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Simulate(a) => commands::simulate(a, &cfg),
        Command::Fit(a) => commands::fit(a, &cfg),
        Command::Evaluate(a) => commands::evaluate(a, &cfg),
        Command::Replicate(a) => commands::replicate(a, &cfg),
        Command::CheckIdentifiability(a) => commands::check_identifiability(a, &cfg),
    })
}
