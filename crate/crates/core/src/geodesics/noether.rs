use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::manifold::{GaussianState, LearningRates, TangentVector};

/// Quantities conserved along a geodesic of the (twisted) Gaussian manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct NoetherInvariants<T: crate::Scalar> {
    pub j_mu: DVector<T>,
    pub j_sigma: DMatrix<T>,
}

/// `J_μ = (1/η_μ) Σ⁻¹ μ̇` and `J_Σ = Σ⁻¹ ((1/η_μ) μ̇ μᵀ + (1/η_Σ) Σ̇)` for a velocity `(μ̇, Σ̇)`.
pub fn noether_invariants<T: crate::Scalar>(
    state: &GaussianState<T>,
    velocity: &TangentVector<T>,
    rates: &LearningRates<T>,
) -> Result<NoetherInvariants<T>> {
    velocity.check_dim(state.dim())?;
    let sigma_inv = state.cov_inverse()?;
    let mean_part = &velocity.v_mu / rates.eta_mu();
    let j_mu = &sigma_inv * &mean_part;
    let j_sigma = &sigma_inv * (&mean_part * state.mean().transpose() + &velocity.v_sigma / rates.eta_sigma());
    Ok(NoetherInvariants { j_mu, j_sigma })
}

/// Invariants of the geodesic whose initial velocity is the twisted IGO speed.
pub(crate) fn invariants_of_speed<T: crate::Scalar>(
    state: &GaussianState<T>,
    speed: &TangentVector<T>,
) -> Result<NoetherInvariants<T>> {
    noether_invariants(state, speed, &LearningRates::unit())
}
