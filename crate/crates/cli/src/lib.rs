//! Command-line front end: schedule solving, forward simulation, sampling,
//! edge-overlap sweeps and evaluation over edge-list files.
//!
//! Every command writes into its output directory a `config.json` holding
//! the fully resolved settings, so a run can be repeated exactly.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use args::Cli;
pub use error::CliError;

use args::Command;

/// Runs a parsed command line and returns the text to print.
pub fn run(cli: Cli) -> Result<String, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", cli.jobs)))?;
    let jobs = cli.jobs;
    pool.install(|| match &cli.command {
        Command::SolveSchedule(a) => commands::cmd_solve_schedule(a, jobs),
        Command::SimulateForward(a) => commands::cmd_simulate_forward(a, jobs),
        Command::Sample(a) => commands::cmd_sample(a, jobs),
        Command::EoSweep(a) => commands::cmd_eo_sweep(a, jobs),
        Command::Eval(a) => commands::cmd_eval(a, jobs),
    })
}
