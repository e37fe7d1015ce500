//! Closed-form exponential map of the full Gaussian manifold.

use nalgebra::{DMatrix, DVector};

use super::noether::invariants_of_speed;
use crate::error::{GigoError, Result};
use crate::linalg;
use crate::manifold::{GaussianState, LearningRates, TangentVector};
use crate::scalar::{count, lit, Scalar};

const MAX_SERIES_TERMS: usize = 200;

/// Largest `max|G²|` handled by a single series evaluation; larger steps are split along the geodesic.
const SERIES_NORM_LIMIT: f64 = 30.0;

/// `ch(sG/2)` and `sh(sG/2)·G⁻¹`, evaluated as power series in `G²` so that `G` is never formed.
///
/// Summation stops once the newest term's max-norm drops below `tol` times the running sum's.
pub fn taylor_ch_shc<T: Scalar>(g2: &DMatrix<T>, s: T, tol: T) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let n = g2.nrows();
    if g2.ncols() != n {
        return Err(GigoError::Input("G² must be square".into()));
    }
    let half_s = s * lit(0.5);
    let x = half_s * half_s;
    let mut term_c = DMatrix::identity(n, n);
    let mut term_s = DMatrix::identity(n, n) * half_s;
    let mut c1 = term_c.clone();
    let mut c2 = term_s.clone();
    for k in 1..MAX_SERIES_TERMS {
        let two_k = count::<T>(2 * k);
        term_c = (&term_c * g2) * (x / ((two_k - T::one()) * two_k));
        term_s = (&term_s * g2) * (x / (two_k * (two_k + T::one())));
        c1 += &term_c;
        c2 += &term_s;
        if c1.iter().chain(c2.iter()).any(|v| !v.is_finite()) {
            return Err(GigoError::SeriesDivergence { iterations: k });
        }
        if linalg::max_abs(&term_c) <= tol * linalg::max_abs(&c1)
            && linalg::max_abs(&term_s) <= tol * linalg::max_abs(&c2)
        {
            return Ok((c1, c2));
        }
    }
    Err(GigoError::SeriesDivergence {
        iterations: MAX_SERIES_TERMS,
    })
}

fn inverse<T: Scalar>(m: &DMatrix<T>, what: &str) -> Result<DMatrix<T>> {
    m.clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|x| x.is_finite()))
        .ok_or_else(|| GigoError::ExponentialMap(format!("{what} is singular")))
}

/// One unit-time step of the untwisted map from `(μ, A)` with velocity `(v_μ, v_Σ)`.
fn unit_step<T: Scalar>(
    mu: &DVector<T>,
    a: &DMatrix<T>,
    v_mu: &DVector<T>,
    v_sigma: &DMatrix<T>,
) -> Result<(DVector<T>, DMatrix<T>)> {
    let a_inv = inverse(a, "covariance root")?;
    let b = linalg::symmetrize(&(&a_inv * v_sigma * a_inv.transpose()));
    let u = &a_inv * v_mu;
    let g2 = &b * &b + (&u * u.transpose()) * lit::<T>(2.0);
    let (c1, c2) = taylor_ch_shc(&g2, T::one(), lit(T::SERIES_TOL))?;
    let r = inverse(&(c1 - &b * &c2), "ch(G/2) - B sh(G/2) G^-1")?.transpose();
    let a_next = a * &r;
    let mu_next = mu + (&a_next * (&c2 * u)) * lit::<T>(2.0);
    Ok((mu_next, a_next))
}

/// Exact GIGO step: the endpoint at time `dt` of the twisted geodesic with initial velocity
/// `(η_μ v_μ, η_Σ v_Σ)`.
///
/// The mean is rescaled by `√(η_Σ/η_μ)` to turn the twisted metric into a multiple of the
/// plain Fisher metric; long steps are split into pieces with `max|G²| ≤ 30`, the velocity of
/// each piece being recovered from the Noether invariants.
pub fn exact_exp<T: Scalar>(
    state: &GaussianState<T>,
    speed: &TangentVector<T>,
    rates: &LearningRates<T>,
    dt: T,
) -> Result<GaussianState<T>> {
    speed.check_dim(state.dim())?;
    if dt == T::zero() || speed.is_zero() {
        return Ok(state.clone());
    }
    // the geodesic equations are translation invariant; working in coordinates centred at
    // the start keeps the J_Σ − J_μ μᵀ drift free of cancellation when |μ| ≫ σ
    let lambda = (rates.eta_sigma() / rates.eta_mu()).sqrt();
    let mut mu = DVector::zeros(state.dim());
    let mut a = state.cov_root().clone();
    let v_mu = speed.v_mu.clone() * (dt * rates.eta_mu() * lambda);
    let v_sigma = &speed.v_sigma * (dt * rates.eta_sigma());

    let a_inv = inverse(&a, "covariance root")?;
    let b = &a_inv * &v_sigma * a_inv.transpose();
    let u = &a_inv * &v_mu;
    let norm = linalg::max_abs(&(&b * &b + (&u * u.transpose()) * lit::<T>(2.0)));
    let pieces = if norm > lit(SERIES_NORM_LIMIT) {
        let k = (norm / lit(SERIES_NORM_LIMIT)).sqrt().ceil();
        k.to_usize()
            .ok_or_else(|| GigoError::ExponentialMap(format!("cannot split a step with |G²| = {norm}")))?
    } else {
        1
    };

    if pieces == 1 {
        (mu, a) = unit_step(&mu, &a, &v_mu, &v_sigma)?;
    } else {
        let start = GaussianState::from_root(mu.clone(), a.clone())?;
        let j = invariants_of_speed(&start, &TangentVector { v_mu, v_sigma })?;
        let inv_k = T::one() / count::<T>(pieces);
        for _ in 0..pieces {
            let sigma = &a * a.transpose();
            let piece_mu = (&sigma * &j.j_mu) * inv_k;
            let drift = &j.j_sigma - &j.j_mu * mu.transpose();
            let piece_sigma = linalg::symmetrize(&(&sigma * drift)) * inv_k;
            (mu, a) = unit_step(&mu, &a, &piece_mu, &piece_sigma)?;
        }
    }

    GaussianState::from_root(mu / lambda + state.mean(), a).map_err(|e| match e {
        GigoError::Degenerate { ratio } => {
            GigoError::ExponentialMap(format!("endpoint covariance is numerically singular (ratio {ratio:e})"))
        }
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesics::{gigo_a_exp, EulerConfig};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(v))
    }

    fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
        let m = DMatrix::from_fn(d, d, |_, _| rng.gen::<f64>() - 0.5);
        &m * m.transpose() + DMatrix::identity(d, d) * 0.5
    }

    fn random_instance(rng: &mut ChaCha8Rng, d: usize) -> (GaussianState<f64>, TangentVector<f64>) {
        let mu = DVector::from_fn(d, |_, _| 2.0 * rng.gen::<f64>() - 1.0);
        let s = GaussianState::from_cov(mu, random_spd(rng, d)).unwrap();
        let m = DMatrix::from_fn(d, d, |_, _| rng.gen::<f64>() - 0.5);
        let v = TangentVector::new(
            DVector::from_fn(d, |_, _| rng.gen::<f64>() - 0.5),
            linalg::symmetrize(&(&m + m.transpose())),
        )
        .unwrap();
        (s, v)
    }

    #[test]
    fn series_zero_argument() {
        let (c1, c2) = taylor_ch_shc(&DMatrix::<f64>::zeros(3, 3), 0.8, 1e-16).unwrap();
        assert_eq!(c1, DMatrix::identity(3, 3));
        assert_eq!(c2, DMatrix::identity(3, 3) * 0.4);
    }

    #[test]
    fn series_scalar_values() {
        let (c1, c2) = taylor_ch_shc(&(DMatrix::<f64>::identity(2, 2) * 4.0), 1.0, 1e-16).unwrap();
        assert!((c1[(0, 0)] - 1f64.cosh()).abs() < 1e-15);
        assert!((c2[(1, 1)] - 1f64.sinh() / 2.0).abs() < 1e-15);
        assert_eq!(c1[(0, 1)], 0.0);

        let (c1, c2) = taylor_ch_shc(&diag(&[1.0, 4.0]), 2.0, 1e-16).unwrap();
        assert!((c1 - diag(&[1f64.cosh(), 2f64.cosh()])).amax() < 1e-14);
        assert!((c2 - diag(&[1f64.sinh(), 2f64.sinh() / 2.0])).amax() < 1e-14);
    }

    #[test]
    fn series_handles_negative_spectrum() {
        // G² = −1 gives ch → cos, sh·G⁻¹ → sin
        let (c1, c2) = taylor_ch_shc(&DMatrix::from_element(1, 1, -1.0f64), 2.0, 1e-16).unwrap();
        assert!((c1[(0, 0)] - 1f64.cos()).abs() < 1e-15);
        assert!((c2[(0, 0)] - 1f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn series_reports_divergence() {
        let err = taylor_ch_shc(&DMatrix::from_element(1, 1, 1e8f64), 1.0, 1e-16).unwrap_err();
        assert!(matches!(err, GigoError::SeriesDivergence { .. }));
    }

    #[test]
    fn zero_speed_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (s, _) = random_instance(&mut rng, 3);
        let r = LearningRates::new(2.0, 0.5).unwrap();
        assert_eq!(exact_exp(&s, &TangentVector::zeros(3), &r, 4.0).unwrap(), s);
    }

    #[test]
    fn fixed_mean_scalar() {
        let s = GaussianState::<f64>::standard(1);
        let v = TangentVector::new(DVector::zeros(1), DMatrix::from_element(1, 1, 2.0)).unwrap();
        let out = exact_exp(&s, &v, &LearningRates::unit(), 1.0).unwrap();
        assert!((out.cov()[(0, 0)] - 2f64.exp()).abs() < 1e-13);
        assert_eq!(out.mean()[0], 0.0);
    }

    #[test]
    fn half_plane_semicircle() {
        // With v_Σ = 0 in d = 1 the geodesic is the half circle through (0, 1) with
        // μ(t) = √2 th(t/√2), σ(t) = 1/ch(t/√2) when starting at unit speed.
        let s = GaussianState::<f64>::standard(1);
        let v = TangentVector::new(DVector::from_element(1, 1.0), DMatrix::zeros(1, 1)).unwrap();
        for t in [0.3, 1.0, 2.5, 6.0, 40.0] {
            let out = exact_exp(&s, &v, &LearningRates::unit(), t).unwrap();
            let r2 = 2f64.sqrt();
            assert!((out.mean()[0] - r2 * (t / r2).tanh()).abs() < 1e-10, "t={t}");
            let sd = out.cov()[(0, 0)].sqrt();
            let expected = 1.0 / (t / r2).cosh();
            assert!(
                (sd - expected).abs() < 1e-10 * expected.max(1e-6),
                "t={t}: {sd} vs {expected}"
            );
        }
    }

    #[test]
    fn matches_fine_euler() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rates = LearningRates::new(1.0, 0.6).unwrap();
        for d in 1..=3 {
            let (s, v) = random_instance(&mut rng, d);
            let exact = exact_exp(&s, &v, &rates, 1.0).unwrap();
            let euler = gigo_a_exp(&s, &v, &rates, 1.0, &EulerConfig::with_steps(100_000)).unwrap();
            let scale = exact.cov().amax().max(exact.mean().amax());
            assert!((exact.cov() - euler.cov()).amax() / scale < 1e-4);
            assert!((exact.mean() - euler.mean()).amax() / scale < 1e-4);
        }
    }

    #[test]
    fn long_steps_are_split_along_the_geodesic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (s, v) = random_instance(&mut rng, 2);
        let r = LearningRates::new(1.3, 0.9).unwrap();
        // scale the speed until a single series evaluation would exceed the limit
        let a_inv = s.cov_root_inverse().unwrap();
        let b = &a_inv * &v.v_sigma * a_inv.transpose() * r.eta_sigma();
        let u = &a_inv * &v.v_mu * (r.eta_mu() * (r.eta_sigma() / r.eta_mu()).sqrt());
        let norm = (&b * &b + &u * u.transpose() * 2.0).amax();
        let dt = (4.0 * SERIES_NORM_LIMIT / norm).sqrt();
        let exact = exact_exp(&s, &v, &r, dt).unwrap();
        let euler = gigo_a_exp(&s, &v, &r, dt, &EulerConfig::with_steps(200_000)).unwrap();
        let scale = exact.cov().amax().max(exact.mean().amax());
        assert!((exact.cov() - euler.cov()).amax() / scale < 1e-4);
        assert!((exact.mean() - euler.mean()).amax() / scale < 1e-4);
    }

    #[test]
    fn works_in_single_precision() {
        let s = GaussianState::<f32>::standard(2);
        let v = TangentVector::new(
            DVector::from_vec(vec![0.5f32, -0.2]),
            DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, -0.2]),
        )
        .unwrap();
        let out32 = exact_exp(&s, &v, &LearningRates::unit(), 1.0).unwrap();
        let s64 = GaussianState::<f64>::standard(2);
        let v64 = TangentVector::new(
            DVector::from_vec(vec![0.5, -0.2]),
            DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, -0.2]),
        )
        .unwrap();
        let out64 = exact_exp(&s64, &v64, &LearningRates::unit(), 1.0).unwrap();
        for (a, b) in out32.cov().iter().zip(out64.cov().iter()) {
            assert!((*a as f64 - b).abs() < 1e-5);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn reparametrisation(seed in any::<u64>(), d in 1usize..4, t in 0.05f64..1.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (s, v) = random_instance(&mut rng, d);
            let r = LearningRates::new(0.5 + rng.gen::<f64>(), 0.5 + rng.gen::<f64>()).unwrap();
            let a = exact_exp(&s, &v, &r, 2.0 * t).unwrap();
            let b = exact_exp(&s, &v.scale(2.0), &r, t).unwrap();
            prop_assert!((a.cov() - b.cov()).amax() <= 1e-10 * a.cov().amax().max(1.0));
            prop_assert!((a.mean() - b.mean()).amax() <= 1e-10 * a.mean().amax().max(1.0));
        }

        #[test]
        fn independent_of_square_root(seed in any::<u64>(), d in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (s, v) = random_instance(&mut rng, d);
            let q = DMatrix::from_fn(d, d, |_, _| rng.gen::<f64>() - 0.5).qr().q();
            let other = s.with_root(s.cov_root() * q).unwrap();
            let r = LearningRates::new(1.0, 0.7).unwrap();
            let a = exact_exp(&s, &v, &r, 1.0).unwrap();
            let b = exact_exp(&other, &v, &r, 1.0).unwrap();
            prop_assert!((a.cov() - b.cov()).amax() <= 1e-10 * a.cov().amax());
            prop_assert!((a.mean() - b.mean()).amax() <= 1e-10 * a.mean().amax().max(1.0));
        }

        #[test]
        fn endpoint_is_symmetric_positive_definite(seed in any::<u64>(), d in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (s, v) = random_instance(&mut rng, d);
            let out = exact_exp(&s, &v, &LearningRates::unit(), 1.0).unwrap();
            prop_assert!(linalg::asymmetry(out.cov()) <= 1e-12 * out.cov().amax());
            prop_assert!(linalg::cholesky(out.cov()).is_some());
        }

        #[test]
        fn fixed_mean_closed_form(seed in any::<u64>(), d in 1usize..4, t in 0.1f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (s, v) = random_instance(&mut rng, d);
            let v = TangentVector::new(DVector::zeros(d), v.v_sigma).unwrap();
            let r = LearningRates::new(0.9, 1.7).unwrap();
            let out = exact_exp(&s, &v, &r, t).unwrap();
            let a = s.cov_root();
            let a_inv = s.cov_root_inverse().unwrap();
            let m = &a_inv * &v.v_sigma * a_inv.transpose() * (t * r.eta_sigma());
            let expected = a * linalg::sym_expm(&m) * a.transpose();
            prop_assert!((out.cov() - &expected).amax() <= 1e-10 * expected.amax());
        }

        #[test]
        fn unit_rates_reduce_to_untwisted(seed in any::<u64>(), d in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (s, v) = random_instance(&mut rng, d);
            let a = exact_exp(&s, &v, &LearningRates::unit(), 0.7).unwrap();
            let b = exact_exp(&s, &v.scale(0.7), &LearningRates::unit(), 1.0).unwrap();
            prop_assert!((a.cov() - b.cov()).amax() <= 1e-12 * a.cov().amax());
        }
    }
}
