//! Benchmark objectives, the repeated-run protocol and the one-dimensional trajectory experiment.
//!
//! The benchmark harness works in `f64`.

mod objectives;
mod protocol;
mod trajectory;

pub use objectives::{cigar_tablet, neg_first_coord, rosenbrock, sphere, Objective};
pub use protocol::{
    median, run_benchmark_cell, run_rng, run_single, uniform_on_sphere, BenchmarkProtocol, CellSummary,
};
pub use trajectory::{
    run_trajectory_experiment, TrajectoryEvent, TrajectoryExperiment, TrajectoryObjective, TrajectoryRow,
};
