use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Algorithm, OptimizerConfig};
use super::updates::{update, SearchDistribution};
use crate::error::{GigoError, Result};
use crate::igo::compute_rank_weights;
use crate::scalar::{lit, Scalar};

/// Search distribution plus the bookkeeping of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState<T: Scalar> {
    pub distribution: SearchDistribution<T>,
    pub evaluations: usize,
    /// Lowest fitness among all points evaluated so far (`+∞` before the first batch).
    pub best_fitness: T,
    pub best_point: Option<DVector<T>>,
    /// Number of completed updates.
    pub step_index: usize,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(distribution: SearchDistribution<T>) -> Self {
        Self {
            distribution,
            evaluations: 0,
            best_fitness: T::max_value().expect("floating point has a maximum"),
            best_point: None,
            step_index: 0,
        }
    }
}

/// Result of sampling and evaluating one generation, before the distribution is updated.
struct Generation<T: Scalar> {
    population: crate::manifold::Population<T>,
    fitness: Vec<T>,
}

fn evaluate<T: Scalar, F, R>(
    state: &mut OptimizerState<T>,
    objective: &F,
    n: usize,
    rng: &mut R,
) -> Result<Generation<T>>
where
    F: Fn(&DVector<T>) -> T + ?Sized,
    R: Rng + ?Sized,
{
    let population = state.distribution.sample(n, rng)?;
    let fitness: Vec<T> = population.x.iter().map(objective).collect();
    state.evaluations += n;
    for (x, &f) in population.x.iter().zip(&fitness) {
        if f < state.best_fitness {
            state.best_fitness = f;
            state.best_point = Some(x.clone());
        }
    }
    Ok(Generation { population, fitness })
}

fn apply_update<T: Scalar>(
    state: &mut OptimizerState<T>,
    generation: &Generation<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<()> {
    let step = state.step_index + 1;
    let attach = |e: GigoError| match e {
        GigoError::CmaBreakdown { .. } => GigoError::CmaBreakdown { step },
        other => other.at_step(step),
    };
    let w = compute_rank_weights(&generation.fitness, &cfg.weights).map_err(attach)?;
    state.distribution = update(&state.distribution, &generation.population, &w, cfg).map_err(attach)?;
    state.step_index = step;
    Ok(())
}

/// Samples `N` points, evaluates them and updates the distribution with `cfg.algorithm`.
pub fn step<T: Scalar, F, R>(
    state: &OptimizerState<T>,
    objective: &F,
    cfg: &OptimizerConfig<T>,
    rng: &mut R,
) -> Result<OptimizerState<T>>
where
    F: Fn(&DVector<T>) -> T + ?Sized,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let mut next = state.clone();
    let generation = evaluate(&mut next, objective, cfg.sample_size, rng)?;
    apply_update(&mut next, &generation, cfg)?;
    Ok(next)
}

fn step_checked<T: Scalar, F, R>(
    family: &str,
    ok: bool,
    state: &OptimizerState<T>,
    objective: &F,
    cfg: &OptimizerConfig<T>,
    rng: &mut R,
) -> Result<OptimizerState<T>>
where
    F: Fn(&DVector<T>) -> T + ?Sized,
    R: Rng + ?Sized,
{
    if !ok {
        return Err(GigoError::Input(format!(
            "{family} step called with algorithm {}",
            cfg.algorithm
        )));
    }
    step(state, objective, cfg, rng)
}

/// One step of any GIGO variant.
pub fn gigo_step<T: Scalar, F, R>(
    state: &OptimizerState<T>,
    objective: &F,
    cfg: &OptimizerConfig<T>,
    rng: &mut R,
) -> Result<OptimizerState<T>>
where
    F: Fn(&DVector<T>) -> T + ?Sized,
    R: Rng + ?Sized,
{
    step_checked("GIGO", cfg.algorithm.is_gigo(), state, objective, cfg, rng)
}

pub fn xnes_step<T: Scalar, F, R>(
    state: &OptimizerState<T>,
    objective: &F,
    cfg: &OptimizerConfig<T>,
    rng: &mut R,
) -> Result<OptimizerState<T>>
where
    F: Fn(&DVector<T>) -> T + ?Sized,
    R: Rng + ?Sized,
{
    step_checked("xNES", cfg.algorithm == Algorithm::Xnes, state, objective, cfg, rng)
}

pub fn cma_step<T: Scalar, F, R>(
    state: &OptimizerState<T>,
    objective: &F,
    cfg: &OptimizerConfig<T>,
    rng: &mut R,
) -> Result<OptimizerState<T>>
where
    F: Fn(&DVector<T>) -> T + ?Sized,
    R: Rng + ?Sized,
{
    step_checked(
        "CMA",
        cfg.algorithm == Algorithm::CmaPureRankMu,
        state,
        objective,
        cfg,
        rng,
    )
}

pub fn blockwise_gigo_step<T: Scalar, F, R>(
    state: &OptimizerState<T>,
    objective: &F,
    cfg: &OptimizerConfig<T>,
    rng: &mut R,
) -> Result<OptimizerState<T>>
where
    F: Fn(&DVector<T>) -> T + ?Sized,
    R: Rng + ?Sized,
{
    step_checked(
        "blockwise GIGO",
        cfg.algorithm == Algorithm::BlockwiseGigo,
        state,
        objective,
        cfg,
        rng,
    )
}

/// Stopping rules of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions<T: Scalar> {
    /// Success once a sampled point reaches this fitness.
    pub target: T,
    /// No generation is started that would exceed this many evaluations.
    pub max_evaluations: usize,
    /// Premature convergence once `tr Σ` falls below this while the target is unmet.
    pub stagnation_floor: T,
    /// Premature convergence once the condition number of `Σ` exceeds this: the search has
    /// collapsed onto a lower-dimensional subspace.
    pub condition_limit: T,
    pub max_steps: Option<usize>,
    /// Keep the distribution after every step in the record.
    pub record_trajectory: bool,
}

impl<T: Scalar> Default for RunOptions<T> {
    fn default() -> Self {
        Self {
            target: lit(1e-8),
            max_evaluations: 1_000_000,
            stagnation_floor: lit(1e-30),
            condition_limit: lit(1e12),
            max_steps: None,
            record_trajectory: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TerminationReason {
    TargetReached,
    BudgetExhausted,
    MaxSteps,
    PrematureConvergence,
    /// The update itself failed (CMA breakdown, integration failure, ...).
    Failed(GigoError),
}

impl TerminationReason {
    pub fn label(&self) -> &'static str {
        match self {
            Self::TargetReached => "target_reached",
            Self::BudgetExhausted => "budget_exhausted",
            Self::MaxSteps => "max_steps",
            Self::PrematureConvergence => "premature",
            Self::Failed(GigoError::CmaBreakdown { .. }) => "cma_breakdown",
            Self::Failed(_) => "failed",
        }
    }
}

/// State after one completed generation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStep<T: Scalar> {
    pub step: usize,
    pub evaluations: usize,
    pub distribution: SearchDistribution<T>,
    pub best_fitness: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord<T: Scalar> {
    pub algorithm: Algorithm,
    pub evaluations: usize,
    pub success: bool,
    pub termination: TerminationReason,
    pub best_fitness: T,
    pub best_point: Option<DVector<T>>,
    pub final_distribution: SearchDistribution<T>,
    /// Best fitness after each generation, including one that ends the run.
    pub best_history: Vec<T>,
    /// Distribution after each completed update; empty unless requested.
    pub trajectory: Vec<RunStep<T>>,
}

impl<T: Scalar> RunRecord<T> {
    /// Evaluations used when the target was hit, `None` for unsuccessful runs.
    pub fn evals_to_target(&self) -> Option<usize> {
        self.success.then_some(self.evaluations)
    }
}

/// Runs the optimizer from `initial` with the random stream seeded by `seed`.
pub fn run<T: Scalar, F>(
    cfg: &OptimizerConfig<T>,
    initial: SearchDistribution<T>,
    objective: &F,
    options: &RunOptions<T>,
    seed: u64,
) -> Result<RunRecord<T>>
where
    F: Fn(&DVector<T>) -> T + ?Sized,
{
    run_with_rng(cfg, initial, objective, options, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// As [`run`], with a caller-provided random stream.
///
/// Errors are returned only for an invalid configuration; failures of the algorithm itself
/// end the run and are reported in [`RunRecord::termination`].
pub fn run_with_rng<T: Scalar, F, R>(
    cfg: &OptimizerConfig<T>,
    initial: SearchDistribution<T>,
    objective: &F,
    options: &RunOptions<T>,
    rng: &mut R,
) -> Result<RunRecord<T>>
where
    F: Fn(&DVector<T>) -> T + ?Sized,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let n = cfg.sample_size;
    let mut state = OptimizerState::new(initial);
    let mut best_history = Vec::new();
    let mut trajectory = Vec::new();

    let termination = loop {
        if state.evaluations + n > options.max_evaluations {
            break TerminationReason::BudgetExhausted;
        }
        if options.max_steps.is_some_and(|m| state.step_index >= m) {
            break TerminationReason::MaxSteps;
        }
        let generation = match evaluate(&mut state, objective, n, rng) {
            Ok(g) => g,
            Err(e) => break TerminationReason::Failed(e.at_step(state.step_index + 1)),
        };
        best_history.push(state.best_fitness);
        if state.best_fitness <= options.target {
            break TerminationReason::TargetReached;
        }
        if let Err(e) = apply_update(&mut state, &generation, cfg) {
            break TerminationReason::Failed(e);
        }
        if options.record_trajectory {
            trajectory.push(RunStep {
                step: state.step_index,
                evaluations: state.evaluations,
                distribution: state.distribution.clone(),
                best_fitness: state.best_fitness,
            });
        }
        if state.distribution.trace() < options.stagnation_floor
            || state.distribution.condition_number() > options.condition_limit
        {
            break TerminationReason::PrematureConvergence;
        }
    };

    Ok(RunRecord {
        algorithm: cfg.algorithm,
        evaluations: state.evaluations,
        success: termination == TerminationReason::TargetReached,
        termination,
        best_fitness: state.best_fitness,
        best_point: state.best_point,
        final_distribution: state.distribution,
        best_history,
        trajectory,
    })
}
