//! Geodesics of the spherical family `N(μ, σ²I)`.
//!
//! With `x = μ/λ` and `λ = √(2d η_μ/η_σ)` the twisted metric is a constant
//! multiple of the Poincaré half-plane metric in the `(x, σ)` plane spanned by
//! the mean direction, so geodesics are vertical lines and half circles. They
//! are written as Möbius images `z(t) = σ₀ (d·i·e^{vt} − c)/(c·i·e^{vt} + d)`.

use nalgebra::DVector;

use crate::error::{GigoError, Result};
use crate::igo::SphericalSpeed;
use crate::manifold::{GaussianState, LearningRates, SphericalGaussianState};
use crate::scalar::{count, lit, Scalar};

/// Parameters of the half-plane geodesic leaving a spherical state.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicGeodesicParams<T: Scalar> {
    pub c: T,
    pub d_coef: T,
    /// Hyperbolic speed, in units where the starting point is `(0, 1)`.
    pub v: T,
    /// Scale between the mean and the horizontal half-plane coordinate.
    pub lambda: T,
    /// Horizontal velocity in the half plane.
    pub v_r: T,
    /// Vertical velocity `η_σ Y_σ`.
    pub v_sigma: T,
    /// Unit mean direction; `None` for a vertical geodesic.
    pub direction: Option<DVector<T>>,
}

/// Computes the Möbius parameters `(c, d)` and speed of the geodesic with initial velocity
/// `(η_μ Y_μ, η_σ Y_σ)`.
pub fn hyperbolic_params<T: Scalar>(
    state: &SphericalGaussianState<T>,
    speed: &SphericalSpeed<T>,
    rates: &LearningRates<T>,
) -> Result<HyperbolicGeodesicParams<T>> {
    let dim = state.dim();
    if speed.y_mu.len() != dim {
        return Err(GigoError::Input(format!(
            "mean speed has dimension {}, state has {dim}",
            speed.y_mu.len()
        )));
    }
    let sigma = state.sigma();
    let lambda = (lit::<T>(2.0) * count::<T>(dim) * rates.eta_mu() / rates.eta_sigma()).sqrt();
    let y_norm = speed.y_mu.norm();
    let v_r = rates.eta_mu() / lambda * y_norm;
    let v_sigma = rates.eta_sigma() * speed.y_sigma;
    let v = v_r.hypot(v_sigma) / sigma;
    let direction = (y_norm > T::zero()).then(|| &speed.y_mu / y_norm);

    if v == T::zero() {
        return Ok(HyperbolicGeodesicParams {
            c: T::zero(),
            d_coef: T::one(),
            v,
            lambda,
            v_r,
            v_sigma,
            direction,
        });
    }
    let s0 = v_sigma / (v * sigma * sigma);
    let m0 = v_r / (v * sigma * sigma);
    let r = s0.hypot(m0);
    // c·d = M₀/2; take the well-conditioned root and recover the other from the product
    let (c, d_coef) = if s0 >= T::zero() {
        let d_coef = ((r + s0) * lit(0.5)).sqrt();
        (m0 * lit(0.5) / d_coef, d_coef)
    } else {
        let c = ((r - s0) * lit(0.5)).sqrt();
        (c, m0 * lit(0.5) / c)
    };
    Ok(HyperbolicGeodesicParams {
        c,
        d_coef,
        v,
        lambda,
        v_r,
        v_sigma,
        direction,
    })
}

/// GIGO step on the spherical family: the point at time `dt` on the half-plane geodesic.
pub fn spherical_exp<T: Scalar>(
    state: &SphericalGaussianState<T>,
    speed: &SphericalSpeed<T>,
    rates: &LearningRates<T>,
    dt: T,
) -> Result<SphericalGaussianState<T>> {
    let p = hyperbolic_params(state, speed, rates)?;
    if p.v == T::zero() || dt == T::zero() {
        return Ok(state.clone());
    }
    let sigma = state.sigma();
    let (c2, d2) = (p.c * p.c, p.d_coef * p.d_coef);
    // multiply numerator and denominator by e^{-2v|t|} so nothing overflows for long steps
    let (re, im) = if dt > T::zero() {
        let q = (-p.v * dt).exp();
        let den = c2 + d2 * q * q;
        (
            sigma * p.c * p.d_coef * (T::one() - q * q) / den,
            sigma * (c2 + d2) * q / den,
        )
    } else {
        let e = (p.v * dt).exp();
        let den = d2 + c2 * e * e;
        (
            sigma * p.c * p.d_coef * (e * e - T::one()) / den,
            sigma * (c2 + d2) * e / den,
        )
    };
    let mean = match &p.direction {
        Some(dir) => state.mean() + dir * (p.lambda * re),
        None => state.mean().clone(),
    };
    if !(im > T::zero()) || !im.is_finite() {
        return Err(GigoError::ExponentialMap(format!(
            "standard deviation left the representable range at dt = {dt}"
        )));
    }
    SphericalGaussianState::new(mean, im)
}

/// Componentwise GIGO step on a product of one-dimensional Gaussians.
///
/// Each state is `N(μ_i, σ_i²)` and each speed is `(v_μ, v_Σ)` in the `(μ, σ²)` chart; the
/// one-dimensional manifold is the spherical family with `d = 1`, where `Y_σ = v_Σ / (2σ)`.
pub fn separable_exp<T: Scalar>(
    states: &[GaussianState<T>],
    speeds: &[crate::manifold::TangentVector<T>],
    rates: &LearningRates<T>,
    dt: T,
) -> Result<Vec<GaussianState<T>>> {
    if states.len() != speeds.len() {
        return Err(GigoError::Input(format!(
            "{} states but {} speeds",
            states.len(),
            speeds.len()
        )));
    }
    states
        .iter()
        .zip(speeds)
        .map(|(s, v)| {
            if s.dim() != 1 || v.dim() != 1 {
                return Err(GigoError::Input("separable components must be one-dimensional".into()));
            }
            let sd = s.cov()[(0, 0)].sqrt();
            let sph = SphericalGaussianState::new(s.mean().clone(), sd)?;
            let y = SphericalSpeed {
                y_mu: v.v_mu.clone(),
                y_sigma: v.v_sigma[(0, 0)] / (sd + sd),
            };
            let out = spherical_exp(&sph, &y, rates, dt)?;
            GaussianState::isotropic(out.mean().clone(), out.sigma())
        })
        .collect()
}
