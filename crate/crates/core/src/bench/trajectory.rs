//! One-dimensional trajectory experiment: large populations, truncation selection, and
//! the recorded `(μ, σ)` path of each algorithm.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use super::protocol::run_rng;
use crate::error::{GigoError, Result};
use crate::igo::SelectionScheme;
use crate::manifold::LearningRates;
use crate::optimizers::{run_with_rng, Algorithm, OptimizerConfig, RunOptions, SearchDistribution, TerminationReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrajectoryObjective {
    /// `x²`
    Quadratic,
    /// `−x`
    Linear,
}

impl TrajectoryObjective {
    pub fn name(self) -> &'static str {
        match self {
            Self::Quadratic => "quadratic",
            Self::Linear => "linear",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::Quadratic => x * x,
            Self::Linear => -x,
        }
    }
}

impl fmt::Display for TrajectoryObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrajectoryObjective {
    type Err = GigoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quadratic" | "x2" | "x^2" => Ok(Self::Quadratic),
            "linear" | "-x" => Ok(Self::Linear),
            _ => Err(GigoError::Input(format!("unknown trajectory objective '{s}'"))),
        }
    }
}

/// Settings of one trajectory run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryExperiment {
    pub algorithm: Algorithm,
    pub objective: TrajectoryObjective,
    pub dt: f64,
    pub sample_size: usize,
    pub rates: LearningRates<f64>,
    /// Selected quantile of the truncation weight `height·1{q ≤ cutoff}`.
    pub cutoff: f64,
    pub height: f64,
    pub mean0: f64,
    pub sigma0: f64,
    /// Simulated time; the run takes `⌈horizon / dt⌉` steps.
    pub horizon: f64,
    pub stagnation_floor: f64,
}

impl TrajectoryExperiment {
    /// λ = 5000, weights `4·1{q ≤ ¼}`, `η = (1, 1.8)`, start at `N(10, 1)`, 40 time units.
    pub fn standard(algorithm: Algorithm, objective: TrajectoryObjective, dt: f64) -> Self {
        Self {
            algorithm,
            objective,
            dt,
            sample_size: 5000,
            rates: LearningRates::new(1.0, 1.8).expect("positive rates"),
            cutoff: 0.25,
            height: 4.0,
            mean0: 10.0,
            sigma0: 1.0,
            horizon: 40.0,
            stagnation_floor: 1e-30,
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    /// Steps between plot markers, one per unit of simulated time.
    pub fn marker_cadence(&self) -> usize {
        (1.0 / self.dt).round().max(1.0) as usize
    }

    fn config(&self) -> Result<OptimizerConfig<f64>> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(GigoError::Domain(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(GigoError::Domain(format!("invalid horizon {}", self.horizon)));
        }
        if !(self.cutoff > 0.0 && self.cutoff <= 1.0 && self.height > 0.0) {
            return Err(GigoError::Domain(
                "truncation needs 0 < cutoff ≤ 1 and height > 0".into(),
            ));
        }
        OptimizerConfig::new(
            self.algorithm,
            self.sample_size,
            self.rates,
            self.dt,
            SelectionScheme::truncation(self.cutoff, self.height),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrajectoryEvent {
    Normal,
    /// The covariance update lost positive definiteness; the run stops here.
    CmaBreakdown,
    /// `σ²` fell below the stagnation floor.
    Premature,
    /// Any other failure of the update.
    Failed,
}

impl TrajectoryEvent {
    pub fn label(self) -> &'static str {
        match self {
            Self::Normal => "normal",
            Self::CmaBreakdown => "cma_breakdown",
            Self::Premature => "premature",
            Self::Failed => "failed",
        }
    }
}

impl fmt::Display for TrajectoryEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub t: f64,
    pub mu: f64,
    pub sigma: f64,
    pub event: TrajectoryEvent,
    /// Set every [`TrajectoryExperiment::marker_cadence`] steps.
    pub marker: bool,
}

/// Runs the experiment and returns one row per step, starting with the initial state at step 0.
///
/// A failing update adds a final row at the failing step carrying the distribution it
/// sampled from and the failure event.
pub fn run_trajectory_experiment(exp: &TrajectoryExperiment, master_seed: u64) -> Result<Vec<TrajectoryRow>> {
    let cfg = exp.config()?;
    let initial = SearchDistribution::isotropic(exp.algorithm, DVector::from_element(1, exp.mean0), exp.sigma0)?;
    let options = RunOptions {
        target: f64::NEG_INFINITY,
        max_evaluations: usize::MAX,
        stagnation_floor: exp.stagnation_floor,
        condition_limit: f64::INFINITY,
        max_steps: Some(exp.steps()),
        record_trajectory: true,
    };
    let objective = exp.objective;
    let f = move |x: &DVector<f64>| objective.eval(x[0]);
    let record = run_with_rng(&cfg, initial.clone(), &f, &options, &mut run_rng(master_seed, 0))?;

    let cadence = exp.marker_cadence();
    let row = |step: usize, dist: &SearchDistribution<f64>, event| TrajectoryRow {
        step,
        t: step as f64 * exp.dt,
        mu: dist.mean()[0],
        sigma: dist.cov()[(0, 0)].sqrt(),
        event,
        marker: step.is_multiple_of(cadence),
    };
    let mut rows = vec![row(0, &initial, TrajectoryEvent::Normal)];
    rows.extend(
        record
            .trajectory
            .iter()
            .map(|s| row(s.step, &s.distribution, TrajectoryEvent::Normal)),
    );
    match &record.termination {
        TerminationReason::PrematureConvergence => {
            if let Some(last) = rows.last_mut() {
                last.event = TrajectoryEvent::Premature;
            }
        }
        TerminationReason::Failed(e) => {
            let event = match e.root_cause() {
                GigoError::CmaBreakdown { .. } => TrajectoryEvent::CmaBreakdown,
                _ => TrajectoryEvent::Failed,
            };
            let step = rows.len();
            rows.push(row(step, &record.final_distribution, event));
        }
        _ => {}
    }
    Ok(rows)
}
