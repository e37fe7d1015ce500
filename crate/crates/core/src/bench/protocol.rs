//! Benchmark protocol: per-dimension defaults, seeding, and cells of repeated runs.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::objectives::Objective;
use crate::error::{GigoError, Result};
use crate::geodesics::EulerConfig;
use crate::igo::SelectionScheme;
use crate::manifold::LearningRates;
use crate::optimizers::{run_with_rng, Algorithm, OptimizerConfig, RunOptions, RunRecord, SearchDistribution};

/// Settings shared by every cell of a benchmark. Logarithms are natural.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkProtocol {
    pub runs: usize,
    pub target: f64,
    pub max_evaluations: usize,
    /// A run has converged prematurely once `tr Σ` drops below this.
    pub stagnation_floor: f64,
    /// ... or once the condition number of `Σ` exceeds this.
    pub condition_limit: f64,
    /// Initial means are uniform on the sphere of this radius.
    pub init_radius: f64,
    pub init_sigma: f64,
    pub dt: f64,
    pub eta_mu: f64,
    /// Overrides the dimension-dependent default.
    pub eta_sigma: Option<f64>,
    /// Overrides `⌊4 + 3 ln d⌋`.
    pub sample_size: Option<usize>,
    pub euler_steps: usize,
}

impl Default for BenchmarkProtocol {
    fn default() -> Self {
        Self::standard()
    }
}

impl BenchmarkProtocol {
    pub fn standard() -> Self {
        Self {
            runs: 24,
            target: 1e-8,
            max_evaluations: 1_000_000,
            stagnation_floor: 1e-30,
            condition_limit: 1e12,
            init_radius: 10.0,
            init_sigma: 1.0,
            dt: 1.0,
            eta_mu: 1.0,
            eta_sigma: None,
            sample_size: None,
            euler_steps: 100,
        }
    }

    pub fn sample_size(&self, dim: usize) -> usize {
        self.sample_size
            .unwrap_or_else(|| (4.0 + 3.0 * (dim as f64).ln()).floor() as usize)
    }

    /// `0.6 (3 + ln d) / (d √d)` unless overridden.
    pub fn eta_sigma(&self, dim: usize) -> f64 {
        self.eta_sigma.unwrap_or_else(|| {
            let d = dim as f64;
            0.6 * (3.0 + d.ln()) / (d * d.sqrt())
        })
    }

    /// `wᵢ = max(0, ln(n/2 + 1) − ln i) / Σⱼ max(0, ln(n/2 + 1) − ln j) − 1/n`, best rank first.
    pub fn weights(n: usize) -> Vec<f64> {
        let top = (n as f64 / 2.0 + 1.0).ln();
        let raw: Vec<f64> = (1..=n).map(|i| (top - (i as f64).ln()).max(0.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|r| r / total - 1.0 / n as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if self.runs == 0 {
            return Err(GigoError::Input("at least one run per cell is required".into()));
        }
        if !positive(self.dt) || !positive(self.eta_mu) || !positive(self.init_sigma) {
            return Err(GigoError::Domain(
                "dt, eta_mu and the initial sigma must be positive".into(),
            ));
        }
        if self.eta_sigma.is_some_and(|e| !positive(e)) {
            return Err(GigoError::Domain("eta_sigma must be positive".into()));
        }
        if self.sample_size.is_some_and(|n| n < 2) {
            return Err(GigoError::Input("sample size must be at least 2".into()));
        }
        if !(self.init_radius >= 0.0) || self.euler_steps == 0 {
            return Err(GigoError::Input("invalid initial radius or Euler step count".into()));
        }
        Ok(())
    }

    /// Optimizer configuration for `algorithm` in dimension `dim`.
    pub fn config(&self, algorithm: Algorithm, dim: usize) -> Result<OptimizerConfig<f64>> {
        self.validate()?;
        if dim == 0 {
            return Err(GigoError::Input("dimension must be at least 1".into()));
        }
        let n = self.sample_size(dim);
        let rates = LearningRates::new(self.eta_mu, self.eta_sigma(dim))?;
        let weights = SelectionScheme::direct(Self::weights(n))?;
        let mut cfg = OptimizerConfig::new(algorithm, n, rates, self.dt, weights)?;
        cfg.euler = EulerConfig::with_steps(self.euler_steps);
        Ok(cfg)
    }

    pub fn run_options(&self) -> RunOptions<f64> {
        RunOptions {
            target: self.target,
            max_evaluations: self.max_evaluations,
            stagnation_floor: self.stagnation_floor,
            condition_limit: self.condition_limit,
            max_steps: None,
            record_trajectory: false,
        }
    }
}

/// Random stream of run `run_index` under `master_seed`: ChaCha8 seeded from the master seed,
/// with the run index as the stream number. Any run can be recomputed on its own.
pub fn run_rng(master_seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run_index);
    rng
}

/// Point uniformly distributed on the sphere of radius `radius` in dimension `dim`.
pub fn uniform_on_sphere<R: Rng + ?Sized>(dim: usize, radius: f64, rng: &mut R) -> DVector<f64> {
    loop {
        let z = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = z.norm();
        if norm > 0.0 {
            return z * (radius / norm);
        }
    }
}

/// Repeated runs of one algorithm on one objective in one dimension.
#[derive(Debug, Clone)]
pub struct CellSummary {
    pub algorithm: Algorithm,
    pub objective: Objective,
    pub dim: usize,
    pub records: Vec<RunRecord<f64>>,
    pub successes: usize,
    /// Median evaluations to target over the successful runs.
    pub median_evals: Option<f64>,
    /// No run reached the target.
    pub all_premature: bool,
}

impl CellSummary {
    pub fn runs(&self) -> usize {
        self.records.len()
    }
}

/// Median of a sample; the mean of the two middle values for an even count.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

/// One independent run: initial mean on the sphere, then the optimizer, all from `rng`.
pub fn run_single(
    cfg: &OptimizerConfig<f64>,
    objective: Objective,
    dim: usize,
    protocol: &BenchmarkProtocol,
    rng: &mut ChaCha8Rng,
) -> Result<RunRecord<f64>> {
    let mean = uniform_on_sphere(dim, protocol.init_radius, rng);
    let initial = SearchDistribution::isotropic(cfg.algorithm, mean, protocol.init_sigma)?;
    let f = |x: &DVector<f64>| objective.evaluate(x).expect("dimension checked");
    run_with_rng(cfg, initial, &f, &protocol.run_options(), rng)
}

/// Runs `protocol.runs` seeded runs in parallel on the current rayon pool. Results are in
/// run order regardless of scheduling.
pub fn run_benchmark_cell(
    algorithm: Algorithm,
    objective: Objective,
    dim: usize,
    protocol: &BenchmarkProtocol,
    master_seed: u64,
) -> Result<CellSummary> {
    objective.check_dim(dim)?;
    let cfg = protocol.config(algorithm, dim)?;
    let records = (0..protocol.runs)
        .into_par_iter()
        .map(|i| run_single(&cfg, objective, dim, protocol, &mut run_rng(master_seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let hits: Vec<f64> = records
        .iter()
        .filter_map(|r| r.evals_to_target().map(|e| e as f64))
        .collect();
    Ok(CellSummary {
        algorithm,
        objective,
        dim,
        successes: hits.len(),
        median_evals: median(&hits),
        all_premature: hits.is_empty(),
        records,
    })
}
