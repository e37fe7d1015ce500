//! Sampling-based optimizers sharing one frame: draw `x_i = A z_i + μ`, rank the fitness
//! values, compute the IGO speed and move the distribution.

mod config;
mod run;
mod updates;

pub use config::{Algorithm, OptimizerConfig};
pub use run::{
    blockwise_gigo_step, cma_step, gigo_step, run, run_with_rng, step, xnes_step, OptimizerState, RunOptions,
    RunRecord, RunStep, TerminationReason,
};
pub use updates::{
    blockwise_gigo_update, cma_update, gigo_update, spherical_gigo_update, update, xnes_update, SearchDistribution,
};
