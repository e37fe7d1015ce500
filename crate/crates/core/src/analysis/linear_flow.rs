//! Behaviour of spherical GIGO on the linear objective `g(x) = −x₁` in the large-population
//! limit, for the truncation selection `w(q) = k·1{q ≤ q₀}`.

use nalgebra::DVector;

use super::special::{integrate, inverse_normal_cdf, normal_pdf};
use crate::error::{GigoError, Result};
use crate::igo::SphericalSpeed;
use crate::manifold::{LearningRates, SphericalGaussianState};

/// Parameters of the linear-objective analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalDtInputs {
    /// Selected quantile, in `(0, ½)`.
    pub q0: f64,
    pub dim: usize,
    /// Height of the truncation weight.
    pub k: f64,
    pub rates: LearningRates<f64>,
}

impl CriticalDtInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.q0 > 0.0 && self.q0 < 0.5) {
            return Err(GigoError::Domain(format!("q0 must lie in (0, 0.5), got {}", self.q0)));
        }
        if self.dim == 0 {
            return Err(GigoError::Domain("dimension must be at least 1".into()));
        }
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(GigoError::Domain(format!("k must be finite and > 0, got {}", self.k)));
        }
        Ok(())
    }
}

/// `α = (1/2d)(∫₀^{q₀} F⁻¹(u)² du − q₀)` by adaptive quadrature and `β = −φ(F⁻¹(q₀))`,
/// where `F` is the standard normal CDF.
///
/// `α σ` is the expected `σ`-speed and `|β| σ` the expected mean speed per unit weight.
pub fn linear_flow_alpha_beta(q0: f64, dim: usize) -> Result<(f64, f64)> {
    if !(q0 > 0.0 && q0 < 1.0) {
        return Err(GigoError::Domain(format!("q0 must lie in (0, 1), got {q0}")));
    }
    if dim == 0 {
        return Err(GigoError::Domain("dimension must be at least 1".into()));
    }
    let integral = integrate(
        |u| {
            let x = inverse_normal_cdf(u).unwrap_or(0.0);
            x * x
        },
        0.0,
        q0,
        1e-12,
    )?;
    let alpha = (integral - q0) / (2.0 * dim as f64);
    let beta = -normal_pdf(inverse_normal_cdf(q0)?);
    Ok((alpha, beta))
}

/// The critical step size and the intermediate constants it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalDt {
    pub alpha: f64,
    pub beta: f64,
    pub u: f64,
    pub v: f64,
    pub dt_cr: f64,
}

/// Step size at which spherical GIGO on `−x₁` keeps `σ` constant from one step to the next;
/// larger steps shrink `σ` geometrically.
///
/// `δt_cr = (1/k)(1/v) ln((√(1+u²)+1)/(√(1+u²)−1))` with `u = √(η_μ/(2dη_σ)) β/α` and
/// `v = √(η_σ²α² + η_μη_σβ²/(2d))`.
pub fn critical_dt(inputs: &CriticalDtInputs) -> Result<CriticalDt> {
    inputs.validate()?;
    let (alpha, beta) = linear_flow_alpha_beta(inputs.q0, inputs.dim)?;
    if !(alpha > 0.0) {
        return Err(GigoError::Domain(format!(
            "alpha = {alpha} is not positive; the flow does not expand"
        )));
    }
    let (em, es) = (inputs.rates.eta_mu(), inputs.rates.eta_sigma());
    let two_d = 2.0 * inputs.dim as f64;
    let u = (em / (two_d * es)).sqrt() * beta / alpha;
    let v = (es * es * alpha * alpha + em * es / two_d * beta * beta).sqrt();
    let root = (1.0 + u * u).sqrt();
    let dt_cr = ((root + 1.0) / (root - 1.0)).ln() / (inputs.k * v);
    Ok(CriticalDt {
        alpha,
        beta,
        u,
        v,
        dt_cr,
    })
}

/// Large-population IGO speed on `g(x) = −x₁`: `Y_μ = k|β|σ e₁`, `Y_σ = kασ`.
///
/// The mean moves towards `+e₁`, the minimising direction of `g`.
pub fn linear_igo_speed(state: &SphericalGaussianState<f64>, q0: f64, k: f64) -> Result<SphericalSpeed<f64>> {
    let (alpha, beta) = linear_flow_alpha_beta(q0, state.dim())?;
    let sigma = state.sigma();
    let mut y_mu = DVector::zeros(state.dim());
    y_mu[0] = k * beta.abs() * sigma;
    Ok(SphericalSpeed {
        y_mu,
        y_sigma: k * alpha * sigma,
    })
}

/// Solution at time `t` of the IGO flow `μ̇ = η_μ Y_μ`, `σ̇ = η_σ Y_σ` on `g(x) = −x₁`:
/// `σ_t = σ₀ exp(kη_σαt)`, `μ_t = μ₀ + (η_μ|β| / (η_σα)) (σ_t − σ₀) e₁`.
pub fn linear_igo_flow(
    t: f64,
    inputs: &CriticalDtInputs,
    mu0: &DVector<f64>,
    sigma0: f64,
) -> Result<(DVector<f64>, f64)> {
    if !(inputs.q0 > 0.0 && inputs.q0 < 1.0) {
        return Err(GigoError::Domain(format!("q0 must lie in (0, 1), got {}", inputs.q0)));
    }
    if mu0.len() != inputs.dim {
        return Err(GigoError::Input("initial mean does not match the dimension".into()));
    }
    let (alpha, beta) = linear_flow_alpha_beta(inputs.q0, inputs.dim)?;
    let (em, es) = (inputs.rates.eta_mu(), inputs.rates.eta_sigma());
    let rate = inputs.k * es * alpha;
    let sigma_t = sigma0 * (rate * t).exp();
    let shift = if alpha == 0.0 {
        inputs.k * em * beta.abs() * sigma0 * t
    } else {
        // (σ_t − σ₀)/α without cancellation for small αt
        em * beta.abs() / es * sigma0 * (rate * t).exp_m1() / alpha
    };
    let mut mu_t = mu0.clone();
    mu_t[0] += shift;
    Ok((mu_t, sigma_t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesics::spherical_exp;

    fn inputs(q0: f64, dim: usize, k: f64, em: f64, es: f64) -> CriticalDtInputs {
        CriticalDtInputs {
            q0,
            dim,
            k,
            rates: LearningRates::new(em, es).unwrap(),
        }
    }

    #[test]
    fn alpha_beta_reference_values() {
        let (a, b) = linear_flow_alpha_beta(0.25, 1).unwrap();
        assert!((a - 0.107).abs() < 1e-3);
        assert!((b + 0.319).abs() < 2e-3);
        // closed form: ∫_{-∞}^{x₀} x² φ = F(x₀) − x₀ φ(x₀), so α = −x₀ φ(x₀) / 2d
        let x0 = inverse_normal_cdf(0.25).unwrap();
        assert!((a + x0 * normal_pdf(x0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn beta_at_median() {
        let (_, b) = linear_flow_alpha_beta(0.5, 7).unwrap();
        assert!((b + 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn alpha_scales_with_inverse_dimension() {
        for q in [0.05, 0.25, 0.4] {
            let (a1, _) = linear_flow_alpha_beta(q, 3).unwrap();
            let (a2, _) = linear_flow_alpha_beta(q, 6).unwrap();
            assert_eq!(a1, 2.0 * a2);
        }
    }

    #[test]
    fn alpha_sign_threshold() {
        for q in [0.01, 0.2, 0.45, 0.49] {
            assert!(linear_flow_alpha_beta(q, 1).unwrap().0 > 0.0);
        }
        for q in [0.51, 0.7, 0.95] {
            assert!(linear_flow_alpha_beta(q, 1).unwrap().0 < 0.0);
        }
    }

    #[test]
    fn critical_dt_reference() {
        let c = critical_dt(&inputs(0.25, 1, 4.0, 1.0, 1.8)).unwrap();
        assert!((c.dt_cr - 0.84).abs() < 0.01, "{}", c.dt_cr);
        let c8 = critical_dt(&inputs(0.25, 1, 8.0, 1.0, 1.8)).unwrap();
        assert!((c8.dt_cr * 2.0 - c.dt_cr).abs() < 1e-15);
        assert!(critical_dt(&inputs(0.6, 1, 4.0, 1.0, 1.8)).is_err());
        assert!(critical_dt(&inputs(0.0, 1, 4.0, 1.0, 1.8)).is_err());
    }

    fn sigma_ratio(dt: f64, inp: &CriticalDtInputs) -> f64 {
        let s = SphericalGaussianState::new(DVector::zeros(inp.dim), 1.0).unwrap();
        let y = linear_igo_speed(&s, inp.q0, inp.k).unwrap();
        spherical_exp(&s, &y, &inp.rates, dt).unwrap().sigma()
    }

    #[test]
    fn critical_dt_separates_growth_and_decay() {
        for inp in [inputs(0.25, 1, 4.0, 1.0, 1.8), inputs(0.1, 3, 2.0, 0.7, 0.4)] {
            let c = critical_dt(&inp).unwrap();
            assert!((sigma_ratio(c.dt_cr, &inp) - 1.0).abs() < 1e-9);
            assert!(sigma_ratio(0.9 * c.dt_cr, &inp) > 1.0);
            assert!(sigma_ratio(1.1 * c.dt_cr, &inp) < 1.0);
        }
    }

    #[test]
    fn flow_matches_small_step_simulation() {
        let inp = inputs(0.25, 2, 4.0, 1.0, 1.8);
        let mu0 = DVector::from_vec(vec![1.0, -2.0]);
        let t = 1.5;
        let n = 20_000;
        let mut s = SphericalGaussianState::new(mu0.clone(), 0.5).unwrap();
        for _ in 0..n {
            let y = linear_igo_speed(&s, inp.q0, inp.k).unwrap();
            s = spherical_exp(&s, &y, &inp.rates, t / n as f64).unwrap();
        }
        let (mu_t, sigma_t) = linear_igo_flow(t, &inp, &mu0, 0.5).unwrap();
        assert!((s.sigma() - sigma_t).abs() < 1e-3 * sigma_t);
        assert!((s.mean() - &mu_t).amax() < 1e-3 * (1.0 + mu_t.amax()));
        assert_eq!(s.mean()[1], -2.0);
    }

    #[test]
    fn flow_at_time_zero() {
        let inp = inputs(0.25, 1, 1.0, 1.0, 1.0);
        let mu0 = DVector::from_element(1, 3.0);
        let (m, s) = linear_igo_flow(0.0, &inp, &mu0, 2.0).unwrap();
        assert_eq!((m[0], s), (3.0, 2.0));
    }

    #[test]
    fn flow_with_equal_rates_is_affine_in_sigma() {
        // with η_μ = η_σ the mean is an affine function of σ_t with slope |β|/α
        let inp = inputs(0.2, 1, 1.0, 0.6, 0.6);
        let (a, b) = linear_flow_alpha_beta(0.2, 1).unwrap();
        let mu0 = DVector::from_element(1, 0.0);
        for t in [0.5, 2.0, 7.0] {
            let (m, s) = linear_igo_flow(t, &inp, &mu0, 1.0).unwrap();
            assert!((m[0] - b.abs() / a * (s - 1.0)).abs() < 1e-12 * s.max(1.0));
        }
    }
}
