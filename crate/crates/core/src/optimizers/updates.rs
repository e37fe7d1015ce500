//! One-step parameter updates given an already-sampled, already-weighted population.

use nalgebra::{DMatrix, DVector};

use super::config::{Algorithm, OptimizerConfig};
use crate::error::{GigoError, Result};
use crate::geodesics::{exact_exp, gigo_a_exp, gigo_sigma_exp, separable_exp, spherical_exp};
use crate::igo::{igo_speed_full, igo_speed_spherical, RankedWeights};
use crate::linalg;
use crate::manifold::{GaussianState, LearningRates, Population, SphericalGaussianState, TangentVector};
use crate::scalar::{count, lit, Scalar};

/// The optimizer's current search distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchDistribution<T: Scalar> {
    Full(GaussianState<T>),
    Spherical(SphericalGaussianState<T>),
}

impl<T: Scalar> SearchDistribution<T> {
    /// `N(mean, σ²I)` in the shape `algorithm` works with.
    pub fn isotropic(algorithm: Algorithm, mean: DVector<T>, sigma: T) -> Result<Self> {
        if algorithm == Algorithm::GigoSpherical {
            Ok(Self::Spherical(SphericalGaussianState::new(mean, sigma)?))
        } else {
            Ok(Self::Full(GaussianState::isotropic(mean, sigma)?))
        }
    }

    pub fn dim(&self) -> usize {
        self.mean().len()
    }

    pub fn mean(&self) -> &DVector<T> {
        match self {
            Self::Full(s) => s.mean(),
            Self::Spherical(s) => s.mean(),
        }
    }

    pub fn cov(&self) -> DMatrix<T> {
        match self {
            Self::Full(s) => s.cov().clone(),
            Self::Spherical(s) => {
                let d = s.dim();
                DMatrix::identity(d, d) * (s.sigma() * s.sigma())
            }
        }
    }

    pub fn trace(&self) -> T {
        match self {
            Self::Full(s) => s.trace(),
            Self::Spherical(s) => count::<T>(s.dim()) * s.sigma() * s.sigma(),
        }
    }

    /// Condition number of the covariance, `∞` when numerically singular.
    pub fn condition_number(&self) -> T {
        match self {
            Self::Full(s) => {
                let r = linalg::singular_ratio(s.cov_root());
                if r > T::zero() {
                    T::one() / (r * r)
                } else {
                    T::max_value().unwrap()
                }
            }
            Self::Spherical(_) => T::one(),
        }
    }

    pub fn to_full(&self) -> GaussianState<T> {
        match self {
            Self::Full(s) => s.clone(),
            Self::Spherical(s) => s.to_full(),
        }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Population<T>> {
        match self {
            Self::Full(s) => crate::manifold::sample_population(s, n, rng),
            Self::Spherical(s) => crate::manifold::sample_population_spherical(s, n, rng),
        }
    }
}

/// GIGO update of a full Gaussian through the exponential map selected by `cfg.algorithm`.
pub fn gigo_update<T: Scalar>(
    state: &GaussianState<T>,
    x: &[DVector<T>],
    w: &RankedWeights<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<GaussianState<T>> {
    let speed = igo_speed_full(state, x, w)?;
    match cfg.algorithm {
        Algorithm::GigoSigma => gigo_sigma_exp(state, &speed, &cfg.rates, cfg.dt, &cfg.euler),
        Algorithm::GigoA => gigo_a_exp(state, &speed, &cfg.rates, cfg.dt, &cfg.euler),
        Algorithm::GigoExact => exact_exp(state, &speed, &cfg.rates, cfg.dt),
        Algorithm::GigoSeparable => separable_update(state, &speed, &cfg.rates, cfg.dt),
        other => Err(GigoError::Input(format!(
            "{other} is not a full-covariance GIGO variant"
        ))),
    }
}

fn separable_update<T: Scalar>(
    state: &GaussianState<T>,
    speed: &TangentVector<T>,
    rates: &LearningRates<T>,
    dt: T,
) -> Result<GaussianState<T>> {
    let d = state.dim();
    let cov = state.cov();
    let scale = linalg::max_abs(cov);
    let off_diagonal = (0..d).flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)));
    for (i, j) in off_diagonal {
        if cov[(i, j)].abs() > scale * lit(1e-12) {
            return Err(GigoError::Input(
                "separable GIGO needs a diagonal covariance matrix".into(),
            ));
        }
    }
    let comps = (0..d)
        .map(|i| GaussianState::isotropic(DVector::from_element(1, state.mean()[i]), cov[(i, i)].sqrt()))
        .collect::<Result<Vec<_>>>()?;
    // the natural gradient on a product manifold is the product of the factors' gradients
    let speeds: Vec<_> = (0..d)
        .map(|i| TangentVector {
            v_mu: DVector::from_element(1, speed.v_mu[i]),
            v_sigma: DMatrix::from_element(1, 1, speed.v_sigma[(i, i)]),
        })
        .collect();
    let out = separable_exp(&comps, &speeds, rates, dt)?;
    let mean = DVector::from_fn(d, |i, _| out[i].mean()[0]);
    let root = DMatrix::from_diagonal(&DVector::from_fn(d, |i, _| out[i].cov_root()[(0, 0)]));
    GaussianState::from_root(mean, root)
}

/// GIGO on `N(μ, σ²I)` through the half-plane geodesics.
pub fn spherical_gigo_update<T: Scalar>(
    state: &SphericalGaussianState<T>,
    x: &[DVector<T>],
    w: &RankedWeights<T>,
    rates: &LearningRates<T>,
    dt: T,
) -> Result<SphericalGaussianState<T>> {
    let speed = igo_speed_spherical(state, x, w)?;
    spherical_exp(state, &speed, rates, dt)
}

/// xNES: `μ ← μ + dt η_μ A G_μ`, `A ← A exp(dt η_Σ G_M / 2)` with `G_μ = Σ ŵ_i z_i` and
/// `G_M = Σ ŵ_i (z_i z_iᵀ − I)`.
pub fn xnes_update<T: Scalar>(
    state: &GaussianState<T>,
    z: &[DVector<T>],
    w: &RankedWeights<T>,
    rates: &LearningRates<T>,
    dt: T,
) -> Result<GaussianState<T>> {
    let d = state.dim();
    if z.len() != w.len() || z.iter().any(|zi| zi.len() != d) {
        return Err(GigoError::Input(
            "population does not match weights or dimension".into(),
        ));
    }
    let mut g_mu = DVector::zeros(d);
    let mut g_m = DMatrix::zeros(d, d);
    let id = DMatrix::<T>::identity(d, d);
    for (zi, &wi) in z.iter().zip(w.as_slice()) {
        if wi == T::zero() {
            continue;
        }
        g_mu += zi * wi;
        g_m += (zi * zi.transpose() - &id) * wi;
    }
    let a = state.cov_root();
    let mean = state.mean() + (a * g_mu) * (dt * rates.eta_mu());
    let root = a * linalg::sym_expm(&(g_m * (dt * rates.eta_sigma() * lit(0.5))));
    GaussianState::from_root(mean, root)
}

/// Pure rank-μ CMA-ES: `μ ← μ + dt η_μ v_μ`, `Σ ← Σ + dt η_Σ v_Σ`, both speeds taken at the old mean.
///
/// A covariance that is no longer positive definite yields [`GigoError::CmaBreakdown`].
pub fn cma_update<T: Scalar>(
    state: &GaussianState<T>,
    x: &[DVector<T>],
    w: &RankedWeights<T>,
    rates: &LearningRates<T>,
    dt: T,
) -> Result<GaussianState<T>> {
    let speed = igo_speed_full(state, x, w)?;
    let mean = state.mean() + speed.v_mu * (dt * rates.eta_mu());
    let cov = state.cov() + speed.v_sigma * (dt * rates.eta_sigma());
    match GaussianState::from_cov(mean, cov) {
        Ok(s) => Ok(s),
        Err(GigoError::Domain(_)) | Err(GigoError::Degenerate { .. }) => Err(GigoError::CmaBreakdown { step: 0 }),
        Err(e) => Err(e),
    }
}

/// Blockwise GIGO for the `(μ, Σ)` splitting: a straight line for the mean and the fixed-mean
/// geodesic `Σ ← A exp(δt_Σ A⁻¹ v_Σ A⁻ᵀ) Aᵀ` for the covariance, each driven by its own block
/// of the IGO speed. The new root is `A exp(δt_Σ A⁻¹ v_Σ A⁻ᵀ / 2)`.
pub fn blockwise_gigo_update<T: Scalar>(
    state: &GaussianState<T>,
    x: &[DVector<T>],
    w: &RankedWeights<T>,
    dt_mu: T,
    dt_sigma: T,
) -> Result<GaussianState<T>> {
    let speed = igo_speed_full(state, x, w)?;
    let a = state.cov_root();
    let a_inv = state.cov_root_inverse()?;
    let m = linalg::symmetrize(&(&a_inv * &speed.v_sigma * a_inv.transpose()));
    let mean = state.mean() + speed.v_mu * dt_mu;
    let root = a * linalg::sym_expm(&(m * (dt_sigma * lit(0.5))));
    GaussianState::from_root(mean, root)
}

/// Applies the update rule of `cfg.algorithm` to a sampled population.
pub fn update<T: Scalar>(
    dist: &SearchDistribution<T>,
    pop: &Population<T>,
    w: &RankedWeights<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<SearchDistribution<T>> {
    use SearchDistribution::{Full, Spherical};
    match (cfg.algorithm, dist) {
        (Algorithm::GigoSpherical, Spherical(s)) => {
            spherical_gigo_update(s, &pop.x, w, &cfg.rates, cfg.dt).map(Spherical)
        }
        (Algorithm::GigoSpherical, Full(_)) | (_, Spherical(_)) => Err(GigoError::Input(format!(
            "{} cannot update this search distribution",
            cfg.algorithm
        ))),
        (Algorithm::Xnes, Full(s)) => xnes_update(s, &pop.z, w, &cfg.rates, cfg.dt).map(Full),
        (Algorithm::CmaPureRankMu, Full(s)) => cma_update(s, &pop.x, w, &cfg.rates, cfg.dt).map(Full),
        (Algorithm::BlockwiseGigo, Full(s)) => {
            let (dt_mu, dt_sigma) = cfg.blockwise_steps();
            blockwise_gigo_update(s, &pop.x, w, dt_mu, dt_sigma).map(Full)
        }
        (_, Full(s)) => gigo_update(s, &pop.x, w, cfg).map(Full),
    }
}
