//! Command-line and config-file arguments. Every field is optional so that a JSON config can
//! supply it; flags given on the command line take precedence over the file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "gigo",
    version,
    about = "Geodesic IGO, xNES and CMA-ES benchmarks and checks"
)]
pub struct Cli {
    /// JSON file with default values: `{"jobs": 4, "bench": {...}, "trajectory": {...}, ...}`.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for independent runs (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Repeated runs per (algorithm, objective, dimension) cell; one CSV row per cell.
    Bench(BenchArgs),
    /// One-dimensional trajectory experiment; one CSV row per step.
    Trajectory(TrajectoryArgs),
    /// Critical step size of spherical GIGO on a linear function, as JSON.
    CriticalDt(CriticalDtArgs),
    /// Endpoint of one geodesic step from a given Gaussian and speed, as JSON.
    Geodesic(GeodesicArgs),
    /// Randomised checks of the cross-module invariants.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchArgs {
    /// Objectives: sphere, cigar_tablet, rosenbrock, neg_first_coord [default: sphere]
    #[arg(long = "objective", value_delimiter = ',')]
    #[serde(alias = "objective")]
    pub objectives: Option<Vec<String>>,
    /// Dimensions [default: 2,4,8]
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Algorithms [default: gigo_a,xnes,cma]
    #[arg(long, value_delimiter = ',')]
    pub algos: Option<Vec<String>>,
    /// Master seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Runs per cell [default: 24]
    #[arg(long)]
    pub runs: Option<usize>,
    /// Target fitness [default: 1e-8]
    #[arg(long)]
    pub target: Option<f64>,
    /// Evaluation budget per run [default: 1000000]
    #[arg(long)]
    pub max_evals: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub eta_mu: Option<f64>,
    /// Covariance learning rate [default: 0.6 (3 + ln d) / (d √d)]
    #[arg(long)]
    pub eta_sigma: Option<f64>,
    /// Population size [default: ⌊4 + 3 ln d⌋]
    #[arg(long)]
    pub sample_size: Option<usize>,
    /// Euler steps per update for the integrated GIGO variants [default: 100]
    #[arg(long)]
    pub euler_steps: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryArgs {
    /// Algorithm [default: gigo_exact]
    #[arg(long)]
    pub algo: Option<String>,
    /// Objective: quadratic (x²) or linear (−x) [default: quadratic]
    #[arg(long = "f")]
    #[serde(alias = "objective")]
    pub f: Option<String>,
    /// Step size [default: 1]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Simulated time [default: 40]
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// [default: 5000]
    #[arg(long)]
    pub sample_size: Option<usize>,
    /// [default: 1]
    #[arg(long)]
    pub eta_mu: Option<f64>,
    /// [default: 1.8]
    #[arg(long)]
    pub eta_sigma: Option<f64>,
    /// Initial mean [default: 10]
    #[arg(long, allow_hyphen_values = true)]
    pub mean: Option<f64>,
    /// Initial standard deviation [default: 1]
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticalDtArgs {
    /// Height of the truncation weight [default: 4]
    #[arg(long)]
    pub k: Option<f64>,
    /// Dimension [default: 1]
    #[arg(long)]
    pub d: Option<usize>,
    /// Selected quantile, in (0, 0.5) [default: 0.25]
    #[arg(long)]
    pub q0: Option<f64>,
    /// [default: 1]
    #[arg(long)]
    pub eta_mu: Option<f64>,
    /// [default: 1.8]
    #[arg(long)]
    pub eta_sigma: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeodesicArgs {
    /// exact, gigo_a, gigo_sigma, xnes, cma or spherical [default: exact]
    #[arg(long)]
    pub map: Option<String>,
    /// Mean, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub mean: Option<Vec<f64>>,
    /// Covariance, row-major, comma separated [default: identity]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub cov: Option<Vec<f64>>,
    /// Mean component of the speed [default: zero]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v_mu: Option<Vec<f64>>,
    /// Covariance component of the speed, row-major [default: zero]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v_sigma: Option<Vec<f64>>,
    /// [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub eta_mu: Option<f64>,
    #[arg(long)]
    pub eta_sigma: Option<f64>,
    /// [default: 100]
    #[arg(long)]
    pub euler_steps: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyArgs {
    /// First seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of consecutive seeds to check [default: 1]
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Replace every property's tolerance with this value
    #[arg(long)]
    pub tol: Option<f64>,
    /// Random instances per property and seed [default: 20]
    #[arg(long)]
    pub instances: Option<usize>,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub jobs: Option<usize>,
    pub bench: BenchArgs,
    pub trajectory: TrajectoryArgs,
    pub critical_dt: CriticalDtArgs,
    pub geodesic: GeodesicArgs,
    pub verify: VerifyArgs,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Field-wise `flag.or(file)`.
macro_rules! overlay {
    ($ty:ident { $($field:ident),* $(,)? }) => {
        impl $ty {
            pub fn overlay(self, file: Self) -> Self {
                Self { $($field: self.$field.or(file.$field)),* }
            }
        }
    };
}

overlay!(BenchArgs {
    objectives,
    dims,
    algos,
    seed,
    runs,
    target,
    max_evals,
    dt,
    eta_mu,
    eta_sigma,
    sample_size,
    euler_steps,
    out,
    format,
});
overlay!(TrajectoryArgs {
    algo,
    f,
    dt,
    horizon,
    seed,
    sample_size,
    eta_mu,
    eta_sigma,
    mean,
    sigma,
    out,
    format,
});
overlay!(CriticalDtArgs {
    k,
    d,
    q0,
    eta_mu,
    eta_sigma,
    out
});
overlay!(GeodesicArgs {
    map,
    mean,
    cov,
    v_mu,
    v_sigma,
    dt,
    eta_mu,
    eta_sigma,
    euler_steps,
    out
});
overlay!(VerifyArgs {
    seed,
    seeds,
    tol,
    instances
});
