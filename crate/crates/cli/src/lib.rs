//! Command-line front end of the `gigo` crate: benchmarks, trajectory experiments, the
//! critical step size, single geodesic steps and randomised invariant checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

use args::{Cli, Command, FileConfig};
use error::CliError;

/// Merges the config file under the flags and runs the subcommand on a pool of `--jobs` threads.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let jobs = cli.jobs.or(file.jobs);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Bench(a) => commands::bench::execute(&a.overlay(file.bench)),
        Command::Trajectory(a) => commands::trajectory::execute(&a.overlay(file.trajectory)),
        Command::CriticalDt(a) => commands::critical_dt::execute(&a.overlay(file.critical_dt)),
        Command::Geodesic(a) => commands::geodesic::execute(&a.overlay(file.geodesic)),
        Command::Verify(a) => commands::verify::execute(&a.overlay(file.verify)),
    })
}
