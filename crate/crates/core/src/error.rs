use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GigoError {
    /// A parameter lies outside the domain of the operation (σ ≤ 0, q₀ ∉ (0, ½), ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input: NaN fitness, dimension mismatch, wrong weight count.
    #[error("invalid input: {0}")]
    Input(String),

    /// The covariance root is numerically singular.
    #[error("degenerate state: singular value ratio {ratio:e} below threshold")]
    Degenerate { ratio: f64 },

    /// Euler integration of the geodesic equations could not keep the covariance valid.
    #[error("integration failure: {0}")]
    Integration(String),

    /// The closed-form exponential map hit a singular intermediate matrix.
    #[error("exponential map failure: {0}")]
    ExponentialMap(String),

    #[error("Taylor series did not converge within {iterations} terms")]
    SeriesDivergence { iterations: usize },

    /// Pure rank-μ CMA-ES produced a covariance matrix that is not positive definite.
    #[error("covariance matrix is not positive definite anymore at step {step}")]
    CmaBreakdown { step: usize },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<GigoError>,
    },
}

impl GigoError {
    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            GigoError::Step { .. } | GigoError::CmaBreakdown { .. } => self,
            other => GigoError::Step {
                step,
                source: Box::new(other),
            },
        }
    }

    /// Strips any step context.
    pub fn root_cause(&self) -> &GigoError {
        match self {
            GigoError::Step { source, .. } => source.root_cause(),
            other => other,
        }
    }
}

pub type Result<T, E = GigoError> = std::result::Result<T, E>;
