//! Update paths `dt ↦ (μ(dt), Σ(dt))` of GIGO, xNES and CMA from a shared IGO speed.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{GigoError, Result};
use crate::geodesics::exact_exp;
use crate::linalg;
use crate::manifold::{GaussianState, LearningRates, TangentVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrajectoryKind {
    /// The geodesic through the exact exponential map.
    Gigo,
    /// Straight mean, `Σ(dt) = A exp(dt η_Σ A⁻¹ v_Σ A⁻ᵀ) Aᵀ`.
    Xnes,
    /// Straight line in the `(μ, Σ)` chart.
    Cma,
}

impl TrajectoryKind {
    pub const ALL: [TrajectoryKind; 3] = [TrajectoryKind::Gigo, TrajectoryKind::Xnes, TrajectoryKind::Cma];
}

impl fmt::Display for TrajectoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrajectoryKind::Gigo => "gigo",
            TrajectoryKind::Xnes => "xnes",
            TrajectoryKind::Cma => "cma",
        })
    }
}

impl FromStr for TrajectoryKind {
    type Err = GigoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gigo" => Ok(TrajectoryKind::Gigo),
            "xnes" => Ok(TrajectoryKind::Xnes),
            "cma" => Ok(TrajectoryKind::Cma),
            _ => Err(GigoError::Input(format!("unknown trajectory kind '{s}'"))),
        }
    }
}

/// A point on an update path. `valid` is false when `sigma` is not positive definite,
/// which only the CMA path can produce.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint<T: Scalar> {
    pub dt: T,
    pub mu: DVector<T>,
    pub sigma: DMatrix<T>,
    pub valid: bool,
}

/// Evaluates the update path of `kind` at parameter `dt` (negative values extend the path backwards).
pub fn trajectory<T: Scalar>(
    kind: TrajectoryKind,
    state: &GaussianState<T>,
    speed: &TangentVector<T>,
    rates: &LearningRates<T>,
    dt: T,
) -> Result<TrajectoryPoint<T>> {
    speed.check_dim(state.dim())?;
    let straight_mean = || state.mean() + &speed.v_mu * (dt * rates.eta_mu());
    let (mu, sigma) = match kind {
        TrajectoryKind::Gigo => {
            let end = exact_exp(state, speed, rates, dt)?;
            (end.mean().clone(), end.cov().clone())
        }
        TrajectoryKind::Xnes => {
            let a = state.cov_root();
            let a_inv = state.cov_root_inverse()?;
            let m = &a_inv * &speed.v_sigma * a_inv.transpose() * (dt * rates.eta_sigma());
            let sigma = linalg::symmetrize(&(a * linalg::sym_expm(&m) * a.transpose()));
            (straight_mean(), sigma)
        }
        TrajectoryKind::Cma => {
            let sigma = state.cov() + &speed.v_sigma * (dt * rates.eta_sigma());
            (straight_mean(), sigma)
        }
    };
    let valid = linalg::cholesky(&sigma).is_some();
    Ok(TrajectoryPoint { dt, mu, sigma, valid })
}

/// Second derivatives at `dt = 0` of the three update paths.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondDerivatives<T: Scalar> {
    /// `η_μ η_Σ v_Σ Σ⁻¹ v_μ`.
    pub mu_gigo: DVector<T>,
    /// `η_Σ² v_Σ Σ⁻¹ v_Σ − η_μ η_Σ v_μ v_μᵀ`.
    pub sigma_gigo: DMatrix<T>,
    /// `η_Σ² v_Σ Σ⁻¹ v_Σ`.
    pub sigma_xnes: DMatrix<T>,
    /// Zero: the xNES mean moves on a straight line.
    pub mu_xnes: DVector<T>,
    /// Zero: both CMA components move on straight lines.
    pub mu_cma: DVector<T>,
    pub sigma_cma: DMatrix<T>,
}

pub fn second_derivatives<T: Scalar>(
    state: &GaussianState<T>,
    speed: &TangentVector<T>,
    rates: &LearningRates<T>,
) -> Result<SecondDerivatives<T>> {
    speed.check_dim(state.dim())?;
    let d = state.dim();
    let sigma_inv = state.cov_inverse()?;
    let (em, es) = (rates.eta_mu(), rates.eta_sigma());
    let quad = linalg::symmetrize(&(&speed.v_sigma * &sigma_inv * &speed.v_sigma)) * (es * es);
    let outer = &speed.v_mu * speed.v_mu.transpose() * (em * es);
    Ok(SecondDerivatives {
        mu_gigo: &speed.v_sigma * (&sigma_inv * &speed.v_mu) * (em * es),
        sigma_gigo: &quad - outer,
        sigma_xnes: quad,
        mu_xnes: DVector::zeros(d),
        mu_cma: DVector::zeros(d),
        sigma_cma: DMatrix::zeros(d, d),
    })
}
