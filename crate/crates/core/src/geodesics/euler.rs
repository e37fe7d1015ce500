//! First-order integration of the geodesic equations written through the
//! Noether invariants: `μ̇ = η_μ Σ J_μ`, `Σ̇ = η_Σ Σ (J_Σ − J_μ μᵀ)`.

use nalgebra::{DMatrix, DVector};

use super::noether::{invariants_of_speed, NoetherInvariants};
use crate::error::{GigoError, Result};
use crate::linalg;
use crate::manifold::{GaussianState, LearningRates, TangentVector};
use crate::scalar::{lit, Scalar};

/// Resolution of the Euler integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerConfig {
    /// Euler steps per unit geodesic step.
    pub steps: usize,
    /// Factor by which the step count grows on each retry of the covariance variant.
    pub reduction_factor: f64,
    pub max_retries: u32,
}

impl Default for EulerConfig {
    fn default() -> Self {
        Self {
            steps: 100,
            reduction_factor: 4.0,
            max_retries: 8,
        }
    }
}

impl EulerConfig {
    pub fn with_steps(steps: usize) -> Self {
        Self {
            steps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(GigoError::Input("Euler step count must be at least 1".into()));
        }
        if !(self.reduction_factor > 1.0) || !self.reduction_factor.is_finite() {
            return Err(GigoError::Input(format!(
                "Euler reduction factor must be > 1, got {}",
                self.reduction_factor
            )));
        }
        Ok(())
    }

    fn steps_for_attempt(&self, attempt: u32) -> usize {
        let n = self.steps as f64 * self.reduction_factor.powi(attempt as i32);
        n.ceil() as usize
    }
}

/// Invariants in coordinates centred at the current mean, and that mean.
///
/// The geodesic equations are translation invariant. Centring keeps `J_Σ − J_μ μᵀ` free of
/// cancellation when `|μ| ≫ σ`; the discrete scheme is unchanged in exact arithmetic.
fn centred_invariants<T: Scalar>(
    state: &GaussianState<T>,
    speed: &TangentVector<T>,
) -> Result<(NoetherInvariants<T>, DVector<T>)> {
    speed.check_dim(state.dim())?;
    let centred = state.with_mean(DVector::zeros(state.dim()));
    Ok((invariants_of_speed(&centred, speed)?, state.mean().clone()))
}

/// Runs `steps` Euler steps on `(μ, Σ)` over `[0, dt]`, calling `observer(i, μ, Σ)` after each.
///
/// Returns the raw endpoint; no positivity check is made.
pub fn integrate_gigo_sigma<T: Scalar>(
    state: &GaussianState<T>,
    speed: &TangentVector<T>,
    rates: &LearningRates<T>,
    dt: T,
    steps: usize,
    mut observer: impl FnMut(usize, &DVector<T>, &DMatrix<T>),
) -> Result<(DVector<T>, DMatrix<T>)> {
    let (j, origin) = centred_invariants(state, speed)?;
    let d = state.dim();
    let h = dt / crate::scalar::count::<T>(steps);
    let mean_gain = h * rates.eta_mu();
    let cov_gain = h * rates.eta_sigma();

    let mut mu = DVector::zeros(d);
    let mut absolute = origin.clone();
    let mut sigma = state.cov().clone();
    let mut rhs = DMatrix::zeros(d, d);
    let mut increment = DMatrix::zeros(d, d);
    for i in 0..steps {
        mu.gemv(mean_gain, &sigma, &j.j_mu, T::one());
        rhs.copy_from(&j.j_sigma);
        rhs.ger(-T::one(), &j.j_mu, &mu, T::one());
        increment.gemm(cov_gain, &sigma, &rhs, T::zero());
        sigma += &increment;
        absolute.copy_from(&origin);
        absolute += &mu;
        observer(i, &absolute, &sigma);
    }
    Ok((mu + origin, sigma))
}

/// GIGO-Σ: Euler integration on `(μ, Σ)`, retried with finer steps while the endpoint is not
/// positive definite. The returned covariance is symmetrised and refactored by Cholesky.
pub fn gigo_sigma_exp<T: Scalar>(
    state: &GaussianState<T>,
    speed: &TangentVector<T>,
    rates: &LearningRates<T>,
    dt: T,
    cfg: &EulerConfig,
) -> Result<GaussianState<T>> {
    cfg.validate()?;
    for attempt in 0..=cfg.max_retries {
        let steps = cfg.steps_for_attempt(attempt);
        let (mu, sigma) = integrate_gigo_sigma(state, speed, rates, dt, steps, |_, _, _| {})?;
        if mu.iter().any(|x| !x.is_finite()) {
            continue;
        }
        if let Ok(next) = GaussianState::from_cov(mu, linalg::symmetrize(&sigma)) {
            return Ok(next);
        }
    }
    Err(GigoError::Integration(format!(
        "covariance not positive definite after {} retries (last attempt used {} Euler steps)",
        cfg.max_retries,
        cfg.steps_for_attempt(cfg.max_retries)
    )))
}

/// Runs `steps` Euler steps on `(μ, A)` over `[0, dt]`.
///
/// After each step `observer(i, μ, A, ΔA)` sees the new state and the increment just added.
pub fn integrate_gigo_a<T: Scalar>(
    state: &GaussianState<T>,
    speed: &TangentVector<T>,
    rates: &LearningRates<T>,
    dt: T,
    steps: usize,
    mut observer: impl FnMut(usize, &DVector<T>, &DMatrix<T>, &DMatrix<T>),
) -> Result<(DVector<T>, DMatrix<T>)> {
    let (j, origin) = centred_invariants(state, speed)?;
    let d = state.dim();
    let h = dt / crate::scalar::count::<T>(steps);
    let mean_gain = h * rates.eta_mu();
    let root_gain = h * rates.eta_sigma() * lit(0.5);
    let j_sigma_t = j.j_sigma.transpose();

    let mut mu = DVector::zeros(d);
    let mut absolute = origin.clone();
    let mut a = state.cov_root().clone();
    let mut at_j = DVector::zeros(d);
    let mut rhs_t = DMatrix::zeros(d, d);
    let mut increment = DMatrix::zeros(d, d);
    for i in 0..steps {
        // μ += h η_μ A Aᵀ J_μ
        at_j.gemv_tr(T::one(), &a, &j.j_mu, T::zero());
        mu.gemv(mean_gain, &a, &at_j, T::one());
        // A += (h/2) η_Σ (J_Σ − J_μ μᵀ)ᵀ A
        rhs_t.copy_from(&j_sigma_t);
        rhs_t.ger(-T::one(), &mu, &j.j_mu, T::one());
        increment.gemm(root_gain, &rhs_t, &a, T::zero());
        a += &increment;
        absolute.copy_from(&origin);
        absolute += &mu;
        observer(i, &absolute, &a, &increment);
    }
    Ok((mu + origin, a))
}

/// GIGO-A: Euler integration on `(μ, A)`; `Σ = A·Aᵀ` stays symmetric by construction.
pub fn gigo_a_exp<T: Scalar>(
    state: &GaussianState<T>,
    speed: &TangentVector<T>,
    rates: &LearningRates<T>,
    dt: T,
    cfg: &EulerConfig,
) -> Result<GaussianState<T>> {
    cfg.validate()?;
    let (mu, a) = integrate_gigo_a(state, speed, rates, dt, cfg.steps, |_, _, _, _| {})?;
    GaussianState::from_root(mu, a).map_err(|e| match e {
        GigoError::Degenerate { ratio } => {
            GigoError::Integration(format!("square root became singular (singular value ratio {ratio:e})"))
        }
        GigoError::Input(msg) => GigoError::Integration(msg),
        other => other,
    })
}
