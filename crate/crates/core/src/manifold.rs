//! Gaussian parameter types, the Fisher metric and its twisted variant, and
//! population sampling.
//!
//! A full Gaussian `N(μ, Σ)` is stored through a square root `A` of its
//! covariance (`Σ = A·Aᵀ`), since every algorithm in this crate samples
//! through `x = A·z + μ`. The covariance itself is cached on construction.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{GigoError, Result};
use crate::linalg;
use crate::scalar::{lit, to_f64, Scalar};

/// A non-degenerate Gaussian `N(μ, A·Aᵀ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState<T: Scalar> {
    mean: DVector<T>,
    cov_root: DMatrix<T>,
    cov: DMatrix<T>,
}

impl<T: Scalar> GaussianState<T> {
    /// Builds a state from a mean and any invertible square root of the covariance.
    pub fn from_root(mean: DVector<T>, cov_root: DMatrix<T>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(GigoError::Input("dimension must be at least 1".into()));
        }
        if cov_root.nrows() != d || cov_root.ncols() != d {
            return Err(GigoError::Input(format!(
                "covariance root is {}x{}, expected {d}x{d}",
                cov_root.nrows(),
                cov_root.ncols()
            )));
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(GigoError::Input("mean has non-finite entries".into()));
        }
        let ratio = linalg::singular_ratio(&cov_root);
        if ratio < lit(T::DEGENERACY_RATIO) {
            return Err(GigoError::Degenerate { ratio: to_f64(ratio) });
        }
        let cov = linalg::symmetrize(&(&cov_root * cov_root.transpose()));
        Ok(Self { mean, cov_root, cov })
    }

    /// Builds a state from a covariance matrix, using its lower Cholesky factor as root.
    pub fn from_cov(mean: DVector<T>, cov: DMatrix<T>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(GigoError::Input(format!(
                "covariance is {}x{}, expected {d}x{d}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let chol = linalg::cholesky(&cov)
            .ok_or_else(|| GigoError::Domain("covariance matrix is not symmetric positive definite".into()))?;
        Self::from_root(mean, chol.unpack())
    }

    /// `N(mean, σ²·I)`.
    pub fn isotropic(mean: DVector<T>, sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) {
            return Err(GigoError::Domain(format!(
                "standard deviation must be > 0, got {sigma}"
            )));
        }
        let d = mean.len();
        Self::from_root(mean, DMatrix::identity(d, d) * sigma)
    }

    pub fn standard(dim: usize) -> Self {
        Self::from_root(DVector::zeros(dim), DMatrix::identity(dim, dim)).expect("identity root is non-degenerate")
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<T> {
        &self.mean
    }

    /// The stored square root `A`.
    pub fn cov_root(&self) -> &DMatrix<T> {
        &self.cov_root
    }

    /// `Σ = A·Aᵀ`, exactly symmetric.
    pub fn cov(&self) -> &DMatrix<T> {
        &self.cov
    }

    pub fn cov_root_inverse(&self) -> Result<DMatrix<T>> {
        self.cov_root
            .clone()
            .try_inverse()
            .ok_or(GigoError::Degenerate { ratio: 0.0 })
    }

    /// `Σ⁻¹ = A⁻ᵀ·A⁻¹`, symmetrised.
    pub fn cov_inverse(&self) -> Result<DMatrix<T>> {
        let inv = self.cov_root_inverse()?;
        Ok(linalg::symmetrize(&(inv.transpose() * inv)))
    }

    pub fn trace(&self) -> T {
        self.cov.trace()
    }

    /// Same distribution, different square root `A·Q` for an orthogonal `Q`.
    pub fn with_root(&self, cov_root: DMatrix<T>) -> Result<Self> {
        Self::from_root(self.mean.clone(), cov_root)
    }

    /// Same covariance and root, new mean.
    ///
    /// # Panics
    /// If `mean` has the wrong dimension or non-finite entries.
    pub fn with_mean(&self, mean: DVector<T>) -> Self {
        assert_eq!(mean.len(), self.dim(), "mean dimension");
        assert!(mean.iter().all(|x| x.is_finite()), "mean must be finite");
        Self {
            mean,
            cov_root: self.cov_root.clone(),
            cov: self.cov.clone(),
        }
    }
}

/// A Gaussian `N(μ, σ²·I)` with covariance proportional to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalGaussianState<T: Scalar> {
    mean: DVector<T>,
    sigma: T,
}

impl<T: Scalar> SphericalGaussianState<T> {
    pub fn new(mean: DVector<T>, sigma: T) -> Result<Self> {
        if mean.is_empty() {
            return Err(GigoError::Input("dimension must be at least 1".into()));
        }
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(GigoError::Domain(format!(
                "standard deviation must be > 0, got {sigma}"
            )));
        }
        Ok(Self { mean, sigma })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<T> {
        &self.mean
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// Embeds the state in the full Gaussian family.
    pub fn to_full(&self) -> GaussianState<T> {
        GaussianState::isotropic(self.mean.clone(), self.sigma).expect("positive sigma gives a non-degenerate root")
    }
}

/// A tangent vector `(v_μ, v_Σ)` in the `(μ, Σ)` chart.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<T: Scalar> {
    pub v_mu: DVector<T>,
    pub v_sigma: DMatrix<T>,
}

impl<T: Scalar> TangentVector<T> {
    /// Validates shapes and symmetry (up to round-off), then stores the exact symmetric part.
    pub fn new(v_mu: DVector<T>, v_sigma: DMatrix<T>) -> Result<Self> {
        let d = v_mu.len();
        if v_sigma.nrows() != d || v_sigma.ncols() != d {
            return Err(GigoError::Input(format!(
                "v_sigma is {}x{}, expected {d}x{d}",
                v_sigma.nrows(),
                v_sigma.ncols()
            )));
        }
        let scale = linalg::max_abs(&v_sigma).max(T::one());
        if linalg::asymmetry(&v_sigma) > scale * lit(1e-8) {
            return Err(GigoError::Input("v_sigma must be symmetric".into()));
        }
        Ok(Self {
            v_mu,
            v_sigma: linalg::symmetrize(&v_sigma),
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            v_mu: DVector::zeros(dim),
            v_sigma: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.v_mu.len()
    }

    pub fn is_zero(&self) -> bool {
        self.v_mu.iter().all(|x| *x == T::zero()) && self.v_sigma.iter().all(|x| *x == T::zero())
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            v_mu: &self.v_mu * k,
            v_sigma: &self.v_sigma * k,
        }
    }

    /// The initial velocity `(η_μ·v_μ, η_Σ·v_Σ)` of the twisted update.
    pub fn twisted(&self, rates: &LearningRates<T>) -> Self {
        Self {
            v_mu: &self.v_mu * rates.eta_mu(),
            v_sigma: &self.v_sigma * rates.eta_sigma(),
        }
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(GigoError::Input(format!(
                "tangent vector has dimension {}, state has {d}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Learning rates `(η_μ, η_Σ)` of the twisted Fisher metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningRates<T: Scalar> {
    eta_mu: T,
    eta_sigma: T,
}

impl<T: Scalar> LearningRates<T> {
    pub fn new(eta_mu: T, eta_sigma: T) -> Result<Self> {
        for (name, v) in [("eta_mu", eta_mu), ("eta_sigma", eta_sigma)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(GigoError::Domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { eta_mu, eta_sigma })
    }

    pub fn unit() -> Self {
        Self {
            eta_mu: T::one(),
            eta_sigma: T::one(),
        }
    }

    pub fn eta_mu(&self) -> T {
        self.eta_mu
    }

    pub fn eta_sigma(&self) -> T {
        self.eta_sigma
    }

    pub fn is_unit(&self) -> bool {
        self.eta_mu == T::one() && self.eta_sigma == T::one()
    }
}

/// Fisher metric of `N(μ, σ²)` in the chart `(μ, σ)`: `diag(1/σ², 2/σ²)`.
pub fn fisher_metric_1d<T: Scalar>(_mu: T, sigma: T) -> Result<DMatrix<T>> {
    if !(sigma > T::zero()) {
        return Err(GigoError::Domain(format!("sigma must be > 0, got {sigma}")));
    }
    let s2 = sigma * sigma;
    Ok(DMatrix::from_diagonal(&DVector::from_vec(vec![
        T::one() / s2,
        lit::<T>(2.0) / s2,
    ])))
}

/// A differentiable parametrisation `θ ↦ (μ(θ), Σ(θ))` of (part of) the Gaussian family.
pub trait GaussianChart<T: Scalar> {
    fn eval(&self, theta: &DVector<T>) -> (DVector<T>, DMatrix<T>);
}

impl<T: Scalar, F> GaussianChart<T> for F
where
    F: Fn(&DVector<T>) -> (DVector<T>, DMatrix<T>),
{
    fn eval(&self, theta: &DVector<T>) -> (DVector<T>, DMatrix<T>) {
        self(theta)
    }
}

/// Fisher information of a chart, with the mean and covariance terms kept apart.
struct FisherTerms<T: Scalar> {
    mean_term: DMatrix<T>,
    cov_term: DMatrix<T>,
}

fn fisher_terms<T: Scalar, C: GaussianChart<T> + ?Sized>(chart: &C, theta: &DVector<T>) -> Result<FisherTerms<T>> {
    let (_, sigma0) = chart.eval(theta);
    let chol = linalg::cholesky(&sigma0)
        .ok_or_else(|| GigoError::Domain("chart covariance is not positive definite".into()))?;
    let sigma_inv = chol.inverse();

    let p = theta.len();
    let mut d_mu = Vec::with_capacity(p);
    let mut d_sigma = Vec::with_capacity(p);
    for i in 0..p {
        // central differences, h = 1e-5 (1 + |θ_i|)
        let h = lit::<T>(1e-5) * (T::one() + theta[i].abs());
        let mut plus = theta.clone();
        plus[i] += h;
        let mut minus = theta.clone();
        minus[i] -= h;
        let (mp, sp) = chart.eval(&plus);
        let (mm, sm) = chart.eval(&minus);
        let two_h = h + h;
        d_mu.push((mp - mm) / two_h);
        d_sigma.push((sp - sm) / two_h);
    }

    let half = lit::<T>(0.5);
    let weighted: Vec<DMatrix<T>> = d_sigma.iter().map(|ds| &sigma_inv * ds).collect();
    let mut mean_term = DMatrix::zeros(p, p);
    let mut cov_term = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let m = (d_mu[i].transpose() * &sigma_inv * &d_mu[j])[(0, 0)];
            let c = half * (&weighted[i] * &weighted[j]).trace();
            mean_term[(i, j)] = m;
            mean_term[(j, i)] = m;
            cov_term[(i, j)] = c;
            cov_term[(j, i)] = c;
        }
    }
    Ok(FisherTerms { mean_term, cov_term })
}

/// Fisher information matrix of an arbitrary Gaussian chart at `θ`:
/// `I_ij = ∂_iμᵀ Σ⁻¹ ∂_jμ + ½ tr(Σ⁻¹ ∂_iΣ Σ⁻¹ ∂_jΣ)`.
///
/// Derivatives of the chart are taken by central finite differences, so this is
/// meant as a reference implementation rather than a hot path.
pub fn fisher_metric_general<T: Scalar, C: GaussianChart<T> + ?Sized>(
    chart: &C,
    theta: &DVector<T>,
) -> Result<DMatrix<T>> {
    let terms = fisher_terms(chart, theta)?;
    Ok(terms.mean_term + terms.cov_term)
}

/// Twisted Fisher metric of a chart: the mean term scaled by `1/η_μ`, the covariance term by `1/η_Σ`.
pub fn fisher_metric_twisted<T: Scalar, C: GaussianChart<T> + ?Sized>(
    chart: &C,
    theta: &DVector<T>,
    rates: &LearningRates<T>,
) -> Result<DMatrix<T>> {
    let terms = fisher_terms(chart, theta)?;
    Ok(terms.mean_term / rates.eta_mu() + terms.cov_term / rates.eta_sigma())
}

/// Twists a metric expressed in a chart split as `(μ-coordinates, Σ-coordinates)`.
///
/// The first `mean_coords` coordinates form the μ-block. Entries are scaled by
/// `1/√(η_a η_b)` where `a`, `b` are the blocks of the row and column; the
/// off-diagonal blocks vanish for a `(μ, Σ)` chart, so this is blockwise scaling.
pub fn twist_metric<T: Scalar>(
    metric: &DMatrix<T>,
    mean_coords: usize,
    rates: &LearningRates<T>,
) -> Result<DMatrix<T>> {
    let n = metric.nrows();
    if metric.ncols() != n {
        return Err(GigoError::Input("metric must be square".into()));
    }
    if mean_coords > n {
        return Err(GigoError::Input(format!(
            "mean block of size {mean_coords} exceeds metric size {n}"
        )));
    }
    let scale: Vec<T> = (0..n)
        .map(|i| {
            let eta = if i < mean_coords {
                rates.eta_mu()
            } else {
                rates.eta_sigma()
            };
            T::one() / eta.sqrt()
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i < mean_coords && j < mean_coords {
            metric[(i, j)] / rates.eta_mu()
        } else if i >= mean_coords && j >= mean_coords {
            metric[(i, j)] / rates.eta_sigma()
        } else {
            metric[(i, j)] * scale[i] * scale[j]
        }
    }))
}

/// One sampled generation: standard-normal draws `z_i` and their images `x_i = A·z_i + μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Population<T: Scalar> {
    pub z: Vec<DVector<T>>,
    pub x: Vec<DVector<T>>,
}

impl<T: Scalar> Population<T> {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Recovers `z_i = A⁻¹(x_i − μ)` for given points, for the root stored in `state`.
    pub fn from_points(state: &GaussianState<T>, x: Vec<DVector<T>>) -> Result<Self> {
        let inv = state.cov_root_inverse()?;
        let z = x
            .iter()
            .map(|xi| {
                if xi.len() != state.dim() {
                    return Err(GigoError::Input("sample dimension mismatch".into()));
                }
                Ok(&inv * (xi - state.mean()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { z, x })
    }
}

fn draw_standard<T: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<T> {
    DVector::from_fn(d, |_, _| T::sample_standard_normal(rng))
}

/// Draws `n` points from `state`: `z_i ~ N(0, I)`, `x_i = A·z_i + μ`.
pub fn sample_population<T: Scalar, R: Rng + ?Sized>(
    state: &GaussianState<T>,
    n: usize,
    rng: &mut R,
) -> Result<Population<T>> {
    if n == 0 {
        return Err(GigoError::Input("sample size must be at least 1".into()));
    }
    let d = state.dim();
    let z: Vec<DVector<T>> = (0..n).map(|_| draw_standard(d, rng)).collect();
    let x = z.iter().map(|zi| state.cov_root() * zi + state.mean()).collect();
    Ok(Population { z, x })
}

/// Spherical counterpart of [`sample_population`]: `x_i = σ·z_i + μ`.
pub fn sample_population_spherical<T: Scalar, R: Rng + ?Sized>(
    state: &SphericalGaussianState<T>,
    n: usize,
    rng: &mut R,
) -> Result<Population<T>> {
    if n == 0 {
        return Err(GigoError::Input("sample size must be at least 1".into()));
    }
    let d = state.dim();
    let z: Vec<DVector<T>> = (0..n).map(|_| draw_standard(d, rng)).collect();
    let x = z.iter().map(|zi| zi * state.sigma() + state.mean()).collect();
    Ok(Population { z, x })
}
