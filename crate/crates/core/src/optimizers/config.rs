use std::fmt;
use std::str::FromStr;

use crate::error::{GigoError, Result};
use crate::geodesics::EulerConfig;
use crate::igo::SelectionScheme;
use crate::manifold::LearningRates;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// GIGO, Euler integration of `(μ, Σ)`.
    GigoSigma,
    /// GIGO, Euler integration of `(μ, A)`.
    GigoA,
    /// GIGO through the closed-form exponential map.
    GigoExact,
    /// GIGO restricted to `N(μ, σ²I)`.
    GigoSpherical,
    /// GIGO on diagonal covariances, one half-plane geodesic per coordinate.
    GigoSeparable,
    Xnes,
    /// Pure rank-μ CMA-ES: no evolution paths, no step-size control.
    CmaPureRankMu,
    /// Separate geodesic steps on the mean and the covariance.
    BlockwiseGigo,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::GigoSigma,
        Algorithm::GigoA,
        Algorithm::GigoExact,
        Algorithm::GigoSpherical,
        Algorithm::GigoSeparable,
        Algorithm::Xnes,
        Algorithm::CmaPureRankMu,
        Algorithm::BlockwiseGigo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GigoSigma => "gigo_sigma",
            Algorithm::GigoA => "gigo_a",
            Algorithm::GigoExact => "gigo_exact",
            Algorithm::GigoSpherical => "gigo_spherical",
            Algorithm::GigoSeparable => "gigo_separable",
            Algorithm::Xnes => "xnes",
            Algorithm::CmaPureRankMu => "cma",
            Algorithm::BlockwiseGigo => "blockwise_gigo",
        }
    }

    pub fn is_gigo(self) -> bool {
        matches!(
            self,
            Algorithm::GigoSigma
                | Algorithm::GigoA
                | Algorithm::GigoExact
                | Algorithm::GigoSpherical
                | Algorithm::GigoSeparable
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = GigoError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "gigo_sigma" => Ok(Algorithm::GigoSigma),
            "gigo_a" | "gigo" => Ok(Algorithm::GigoA),
            "gigo_exact" => Ok(Algorithm::GigoExact),
            "gigo_spherical" => Ok(Algorithm::GigoSpherical),
            "gigo_separable" => Ok(Algorithm::GigoSeparable),
            "xnes" => Ok(Algorithm::Xnes),
            "cma" | "cma_pure_rank_mu" => Ok(Algorithm::CmaPureRankMu),
            "blockwise_gigo" | "blockwise" => Ok(Algorithm::BlockwiseGigo),
            _ => Err(GigoError::Input(format!("unknown algorithm '{s}'"))),
        }
    }
}

/// Everything one optimizer step needs besides the current distribution.
///
/// Only the products `dt·η_μ` and `dt·η_Σ` affect the update; both are exposed so that
/// step size and learning rates can be set independently.
#[derive(Debug, Clone)]
pub struct OptimizerConfig<T: Scalar> {
    pub algorithm: Algorithm,
    pub sample_size: usize,
    pub rates: LearningRates<T>,
    pub dt: T,
    pub weights: SelectionScheme<T>,
    /// Used by the Euler GIGO variants only.
    pub euler: EulerConfig,
    /// `(δt_μ, δt_Σ)` for blockwise GIGO; defaults to `(dt·η_μ, dt·η_Σ)`.
    pub blockwise_dt: Option<(T, T)>,
}

impl<T: Scalar> OptimizerConfig<T> {
    pub fn new(
        algorithm: Algorithm,
        sample_size: usize,
        rates: LearningRates<T>,
        dt: T,
        weights: SelectionScheme<T>,
    ) -> Result<Self> {
        let cfg = Self {
            algorithm,
            sample_size,
            rates,
            dt,
            weights,
            euler: EulerConfig::default(),
            blockwise_dt: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_algorithm(&self, algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_size < 2 {
            return Err(GigoError::Input(format!(
                "sample size must be at least 2, got {}",
                self.sample_size
            )));
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(GigoError::Input(format!("dt must be finite and > 0, got {}", self.dt)));
        }
        if let SelectionScheme::Direct(w) = &self.weights {
            if w.len() != self.sample_size {
                return Err(GigoError::Input(format!(
                    "{} weights for sample size {}",
                    w.len(),
                    self.sample_size
                )));
            }
        }
        if let Some((a, b)) = self.blockwise_dt {
            if !(a >= T::zero()) || !(b >= T::zero()) {
                return Err(GigoError::Input("blockwise step sizes must be >= 0".into()));
            }
        }
        self.euler.validate()
    }

    pub fn blockwise_steps(&self) -> (T, T) {
        self.blockwise_dt
            .unwrap_or((self.dt * self.rates.eta_mu(), self.dt * self.rates.eta_sigma()))
    }
}
