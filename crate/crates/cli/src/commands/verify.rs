//! Randomised checks of properties that tie several modules together. Each check reports the
//! worst value of its measure over the random instances and passes when it is within tolerance.

use gigo::analysis::{second_derivatives, trajectory, TrajectoryKind};
use gigo::bench::run_rng;
use gigo::geodesics::{exact_exp, gigo_a_exp, integrate_gigo_a, integrate_gigo_sigma, noether_invariants, EulerConfig};
use gigo::igo::RankedWeights;
use gigo::manifold::sample_population;
use gigo::optimizers::{blockwise_gigo_update, xnes_update};
use gigo::{linalg, GaussianState, LearningRates, TangentVector};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::args::VerifyArgs;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    NoetherGigoSigma,
    NoetherGigoA,
    ExactMatchesEuler,
    XnesIsBlockwise,
    ExactRootIndependent,
    XnesRootIndependent,
    SecondDerivatives,
    FixedMeanMatchesXnes,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::NoetherGigoSigma,
        Property::NoetherGigoA,
        Property::ExactMatchesEuler,
        Property::XnesIsBlockwise,
        Property::ExactRootIndependent,
        Property::XnesRootIndependent,
        Property::SecondDerivatives,
        Property::FixedMeanMatchesXnes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::NoetherGigoSigma => "noether_gigo_sigma",
            Property::NoetherGigoA => "noether_gigo_a",
            Property::ExactMatchesEuler => "exact_matches_euler",
            Property::XnesIsBlockwise => "xnes_is_blockwise",
            Property::ExactRootIndependent => "exact_root_independent",
            Property::XnesRootIndependent => "xnes_root_independent",
            Property::SecondDerivatives => "second_derivatives",
            Property::FixedMeanMatchesXnes => "fixed_mean_matches_xnes",
        }
    }

    /// Default tolerance on the measure returned by [`Property::measure`].
    pub fn tolerance(self) -> f64 {
        match self {
            // |drift(N)/drift(2N) − 2| for a first-order scheme
            Property::NoetherGigoSigma | Property::NoetherGigoA => 0.2,
            Property::ExactMatchesEuler => 1e-3,
            Property::XnesIsBlockwise => 1e-12,
            Property::ExactRootIndependent | Property::XnesRootIndependent => 1e-12,
            Property::SecondDerivatives => 1e-5,
            Property::FixedMeanMatchesXnes => 1e-10,
        }
    }

    /// Worst measure over `instances` random instances drawn from `rng`.
    pub fn measure(self, rng: &mut ChaCha8Rng, instances: usize) -> Result<f64, CliError> {
        let mut worst: f64 = 0.0;
        for _ in 0..instances {
            let m = match self {
                Property::NoetherGigoSigma => noether_order(rng, false)?,
                Property::NoetherGigoA => noether_order(rng, true)?,
                Property::ExactMatchesEuler => exact_vs_euler(rng)?,
                Property::XnesIsBlockwise => xnes_vs_blockwise(rng)?,
                Property::ExactRootIndependent => root_independence(rng, true)?,
                Property::XnesRootIndependent => root_independence(rng, false)?,
                Property::SecondDerivatives => second_derivative_gap(rng)?,
                Property::FixedMeanMatchesXnes => fixed_mean_gap(rng)?,
            };
            // NaN must fail
            worst = if m.is_nan() { f64::NAN } else { worst.max(m) };
            if worst.is_nan() {
                break;
            }
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub property: Property,
    pub seed: u64,
    pub measured: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.measured <= self.tolerance
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} seed={} measured={:.3e} tol={:.3e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.property.name(),
            self.seed,
            self.measured,
            self.tolerance
        )
    }
}

/// Runs every property for seeds `seed..seed + seeds`, in a deterministic order.
pub fn run_checks(seed: u64, seeds: u64, instances: usize, tol: Option<f64>) -> Result<Vec<CheckResult>, CliError> {
    if seeds == 0 || instances == 0 {
        return Err(CliError::Config("seeds and instances must be at least 1".into()));
    }
    if let Some(t) = tol {
        if !(t >= 0.0) {
            return Err(CliError::Config(format!("tolerance must be >= 0, got {t}")));
        }
    }
    let jobs: Vec<(u64, usize, Property)> = (seed..seed + seeds)
        .flat_map(|s| Property::ALL.iter().enumerate().map(move |(i, &p)| (s, i, p)))
        .collect();
    jobs.into_par_iter()
        .map(|(s, i, p)| {
            let mut rng = run_rng(s, i as u64);
            Ok(CheckResult {
                property: p,
                seed: s,
                measured: p.measure(&mut rng, instances)?,
                tolerance: tol.unwrap_or_else(|| p.tolerance()),
            })
        })
        .collect()
}

pub fn execute(args: &VerifyArgs) -> Result<(), CliError> {
    let results = run_checks(
        args.seed.unwrap_or(0),
        args.seeds.unwrap_or(1),
        args.instances.unwrap_or(20),
        args.tol,
    )?;
    let mut text = String::new();
    for r in &results {
        text.push_str(&r.line());
        text.push('\n');
    }
    crate::output::emit(None, &text)?;
    let failed = results.iter().filter(|r| !r.passed()).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::ChecksFailed {
            failed,
            total: results.len(),
        })
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen::<f64>() - 0.5
}

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> Result<GaussianState<f64>, CliError> {
    let m = DMatrix::from_fn(d, d, |_, _| uniform(rng));
    let cov = &m * m.transpose() + DMatrix::identity(d, d) * 0.5;
    Ok(GaussianState::from_cov(
        DVector::from_fn(d, |_, _| 2.0 * uniform(rng)),
        cov,
    )?)
}

fn random_speed(rng: &mut ChaCha8Rng, d: usize) -> Result<TangentVector<f64>, CliError> {
    let n = DMatrix::from_fn(d, d, |_, _| uniform(rng));
    Ok(TangentVector::new(
        DVector::from_fn(d, |_, _| uniform(rng)),
        linalg::symmetrize(&((&n + n.transpose()) * 0.5)),
    )?)
}

fn random_rates(rng: &mut ChaCha8Rng) -> Result<LearningRates<f64>, CliError> {
    Ok(LearningRates::new(0.5 + rng.gen::<f64>(), 0.5 + rng.gen::<f64>())?)
}

fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |_, _| uniform(rng)).qr().q()
}

fn rel_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / a.amax().max(1.0)
}

fn rel_gap_vec(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax() / a.amax().max(1.0)
}

/// Relative distance between the start invariants and those of the last Euler step, with the
/// velocity taken as a backward difference.
fn noether_drift(
    s: &GaussianState<f64>,
    v: &TangentVector<f64>,
    rates: &LearningRates<f64>,
    steps: usize,
    on_root: bool,
) -> Result<f64, CliError> {
    let j0 = noether_invariants(s, &v.twisted(rates), rates)?;
    let mut prev = (s.mean().clone(), s.cov().clone());
    let mut last = prev.clone();
    if on_root {
        integrate_gigo_a(s, v, rates, 1.0, steps, |_, m, a, _| {
            prev = std::mem::replace(&mut last, (m.clone(), a * a.transpose()));
        })?;
    } else {
        integrate_gigo_sigma(s, v, rates, 1.0, steps, |_, m, c| {
            prev = std::mem::replace(&mut last, (m.clone(), c.clone()));
        })?;
    }
    let h = 1.0 / steps as f64;
    let vel = TangentVector::new((&last.0 - &prev.0) / h, linalg::symmetrize(&((&last.1 - &prev.1) / h)))?;
    let end = GaussianState::from_cov(last.0.clone(), linalg::symmetrize(&last.1))?;
    let j = noether_invariants(&end, &vel, rates)?;
    let num = ((&j.j_mu - &j0.j_mu).norm_squared() + (&j.j_sigma - &j0.j_sigma).norm_squared()).sqrt();
    Ok(num / (j0.j_mu.norm_squared() + j0.j_sigma.norm_squared()).sqrt())
}

/// `|drift(N)/drift(2N) − 2|` at `N = 10⁴`: the invariants drift at first order in the step.
fn noether_order(rng: &mut ChaCha8Rng, on_root: bool) -> Result<f64, CliError> {
    let d = rng.gen_range(1..=3);
    let s = random_state(rng, d)?;
    let v = random_speed(rng, d)?;
    let rates = random_rates(rng)?;
    let coarse = noether_drift(&s, &v, &rates, 10_000, on_root)?;
    let fine = noether_drift(&s, &v, &rates, 20_000, on_root)?;
    Ok((coarse / fine - 2.0).abs())
}

/// Exact exponential map against GIGO-A with 10⁴ Euler steps.
fn exact_vs_euler(rng: &mut ChaCha8Rng) -> Result<f64, CliError> {
    let d = rng.gen_range(1..=3);
    let s = random_state(rng, d)?;
    let v = random_speed(rng, d)?;
    let rates = random_rates(rng)?;
    let a = exact_exp(&s, &v, &rates, 0.5)?;
    let b = gigo_a_exp(&s, &v, &rates, 0.5, &EulerConfig::with_steps(10_000))?;
    Ok(rel_gap_vec(a.mean(), b.mean()).max(rel_gap(a.cov(), b.cov())))
}

fn test_weights(n: usize) -> RankedWeights<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|i| ((n as f64 / 2.0 + 1.0).ln() - (i as f64 + 1.0).ln()).max(0.0))
        .collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x = *x / total - 1.0 / n as f64;
    }
    RankedWeights::from_aligned(w)
}

/// xNES and blockwise GIGO with `(δt_μ, δt_Σ) = (η_μ, η_Σ)` from a common state on shared samples.
fn xnes_vs_blockwise(rng: &mut ChaCha8Rng) -> Result<f64, CliError> {
    let d = [1, 2, 5][rng.gen_range(0..3)];
    let s = random_state(rng, d)?;
    let n = 4 + 3 * d;
    let w = test_weights(n);
    let rates = LearningRates::new(0.2 + rng.gen::<f64>(), 0.05 + rng.gen::<f64>())?;
    let pop = sample_population(&s, n, rng)?;
    let a = xnes_update(&s, &pop.z, &w, &rates, 1.0)?;
    let b = blockwise_gigo_update(&s, &pop.x, &w, rates.eta_mu(), rates.eta_sigma())?;
    Ok(rel_gap_vec(a.mean(), b.mean()).max(rel_gap(a.cov(), b.cov())))
}

/// Replacing the square root `A` of the start covariance by `A Q` leaves the step unchanged.
fn root_independence(rng: &mut ChaCha8Rng, exact: bool) -> Result<f64, CliError> {
    let d = rng.gen_range(1..=4);
    let s = random_state(rng, d)?;
    let other = s.with_root(s.cov_root() * random_orthogonal(rng, d))?;
    let rates = random_rates(rng)?;
    let (a, b) = if exact {
        let v = random_speed(rng, d)?;
        (exact_exp(&s, &v, &rates, 1.0)?, exact_exp(&other, &v, &rates, 1.0)?)
    } else {
        let n = 6;
        let pop = sample_population(&s, n, rng)?;
        let pop2 = gigo::manifold::Population::from_points(&other, pop.x.clone())?;
        let w = test_weights(n);
        (
            xnes_update(&s, &pop.z, &w, &rates, 1.0)?,
            xnes_update(&other, &pop2.z, &w, &rates, 1.0)?,
        )
    };
    Ok(rel_gap_vec(a.mean(), b.mean()).max((a.cov() - b.cov()).amax() / a.cov().amax()))
}

/// Central second differences of the GIGO, xNES and CMA paths against the closed forms.
fn second_derivative_gap(rng: &mut ChaCha8Rng) -> Result<f64, CliError> {
    let d = rng.gen_range(1..=3);
    let s = random_state(rng, d)?;
    let v = random_speed(rng, d)?;
    let rates = random_rates(rng)?;
    let sd = second_derivatives(&s, &v, &rates)?;
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for (kind, mu2, sigma2) in [
        (TrajectoryKind::Gigo, &sd.mu_gigo, &sd.sigma_gigo),
        (TrajectoryKind::Xnes, &sd.mu_xnes, &sd.sigma_xnes),
        (TrajectoryKind::Cma, &sd.mu_cma, &sd.sigma_cma),
    ] {
        let p = trajectory(kind, &s, &v, &rates, h)?;
        let m = trajectory(kind, &s, &v, &rates, -h)?;
        let fd_mu = (&p.mu + &m.mu - s.mean() * 2.0) / (h * h);
        let fd_sigma = (&p.sigma + &m.sigma - s.cov() * 2.0) / (h * h);
        worst = worst.max((fd_mu - mu2).amax()).max((fd_sigma - sigma2).amax());
    }
    let scale = v.v_mu.amax().max(v.v_sigma.amax()).max(1.0);
    Ok(worst / (scale * scale))
}

/// With zero mean speed the GIGO geodesic keeps the mean fixed and moves the covariance
/// along the xNES path.
fn fixed_mean_gap(rng: &mut ChaCha8Rng) -> Result<f64, CliError> {
    let d = rng.gen_range(1..=4);
    let s = random_state(rng, d)?;
    let v = random_speed(rng, d)?;
    let v = TangentVector::new(DVector::zeros(d), v.v_sigma)?;
    let rates = random_rates(rng)?;
    let dt = 0.1 + 1.9 * rng.gen::<f64>();
    let g = exact_exp(&s, &v, &rates, dt)?;
    let x = trajectory(TrajectoryKind::Xnes, &s, &v, &rates, dt)?;
    Ok(rel_gap_vec(s.mean(), g.mean()).max(rel_gap(&x.sigma, g.cov())))
}
