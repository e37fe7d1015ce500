//! Rank-based selection weights and the closed-form IGO speeds.
//!
//! Fitness is minimised: the sample with the lowest value gets rank 0.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{GigoError, Result};
use crate::manifold::{GaussianState, SphericalGaussianState, TangentVector};
use crate::scalar::{count, lit, Scalar};

type QuantileFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// How ranked samples are turned into weights.
#[derive(Clone)]
pub enum SelectionScheme<T: Scalar> {
    /// A non-increasing `w: [0, 1] → ℝ`; sample of rank `r` among `N` gets `w((r + ½)/N) / N`.
    Quantile(QuantileFn<T>),
    /// Weights given directly by rank, best first. Length must equal the sample size.
    Direct(Vec<T>),
}

impl<T: Scalar> SelectionScheme<T> {
    pub fn quantile(w: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::Quantile(Arc::new(w))
    }

    /// `w(q) = height · 1{q ≤ cutoff}`.
    pub fn truncation(cutoff: T, height: T) -> Self {
        Self::quantile(move |q| if q <= cutoff { height } else { T::zero() })
    }

    /// Direct weights; rejects vectors that increase with rank.
    pub fn direct(weights: Vec<T>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(GigoError::Input("weights must be finite".into()));
        }
        if weights.windows(2).any(|p| p[1] > p[0]) {
            return Err(GigoError::Input("weights must be non-increasing in rank".into()));
        }
        Ok(Self::Direct(weights))
    }

    fn weight_at(&self, rank: usize, n: usize) -> T {
        match self {
            Self::Quantile(w) => {
                let q = (count::<T>(rank) + lit(0.5)) / count::<T>(n);
                w(q) / count::<T>(n)
            }
            Self::Direct(v) => v[rank],
        }
    }
}

impl<T: Scalar> fmt::Debug for SelectionScheme<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Quantile(_) => f.write_str("Quantile(<fn>)"),
            Self::Direct(v) => f.debug_tuple("Direct").field(v).finish(),
        }
    }
}

/// Per-sample weights `ŵ_i`, aligned with the sample order (not the rank order).
#[derive(Debug, Clone, PartialEq)]
pub struct RankedWeights<T: Scalar> {
    w_hat: Vec<T>,
}

impl<T: Scalar> RankedWeights<T> {
    /// Wraps weights that are already aligned with samples.
    pub fn from_aligned(w_hat: Vec<T>) -> Self {
        Self { w_hat }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.w_hat
    }

    pub fn len(&self) -> usize {
        self.w_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w_hat.is_empty()
    }

    pub fn sum(&self) -> T {
        self.w_hat.iter().fold(T::zero(), |a, &b| a + b)
    }
}

/// Assigns `ŵ_i` from fitness ranks. Tied fitness values share the mean weight of their rank block.
pub fn compute_rank_weights<T: Scalar>(fitness: &[T], scheme: &SelectionScheme<T>) -> Result<RankedWeights<T>> {
    let n = fitness.len();
    if n == 0 {
        return Err(GigoError::Input("no fitness values".into()));
    }
    if let Some(i) = fitness.iter().position(|f| f.partial_cmp(f).is_none()) {
        return Err(GigoError::Input(format!("fitness of sample {i} is NaN")));
    }
    if let SelectionScheme::Direct(v) = scheme {
        if v.len() != n {
            return Err(GigoError::Input(format!("{} direct weights for {n} samples", v.len())));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fitness[a].partial_cmp(&fitness[b]).expect("NaN filtered above"));

    let mut w_hat = vec![T::zero(); n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && fitness[order[end]] == fitness[order[start]] {
            end += 1;
        }
        let w = if end - start == 1 {
            scheme.weight_at(start, n)
        } else {
            let total = (start..end).fold(T::zero(), |acc, r| acc + scheme.weight_at(r, n));
            total / count::<T>(end - start)
        };
        for &i in &order[start..end] {
            w_hat[i] = w;
        }
        start = end;
    }
    Ok(RankedWeights { w_hat })
}

fn check_samples<T: Scalar>(d: usize, samples: &[DVector<T>], w: &RankedWeights<T>) -> Result<()> {
    if samples.len() != w.len() {
        return Err(GigoError::Input(format!(
            "{} samples but {} weights",
            samples.len(),
            w.len()
        )));
    }
    if samples.iter().any(|x| x.len() != d) {
        return Err(GigoError::Input("sample dimension mismatch".into()));
    }
    Ok(())
}

/// IGO speed of the full Gaussian family in the `(μ, Σ)` chart:
/// `v_μ = Σ ŵ_i (x_i − μ)`, `v_Σ = Σ ŵ_i ((x_i − μ)(x_i − μ)ᵀ − Σ)`.
pub fn igo_speed_full<T: Scalar>(
    state: &GaussianState<T>,
    samples: &[DVector<T>],
    w: &RankedWeights<T>,
) -> Result<TangentVector<T>> {
    let d = state.dim();
    check_samples(d, samples, w)?;
    let mut v_mu = DVector::zeros(d);
    let mut v_sigma = nalgebra::DMatrix::zeros(d, d);
    for (x, &wi) in samples.iter().zip(w.as_slice()) {
        if wi == T::zero() {
            continue;
        }
        let dx = x - state.mean();
        v_mu += &dx * wi;
        // dx·dxᵀ is exactly symmetric since scalar products commute
        v_sigma += (&dx * dx.transpose() - state.cov()) * wi;
    }
    Ok(TangentVector { v_mu, v_sigma })
}

/// IGO speed `(Y_μ, Y_σ)` of the spherical family in the `(μ, σ)` chart.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalSpeed<T: Scalar> {
    pub y_mu: DVector<T>,
    pub y_sigma: T,
}

impl<T: Scalar> SphericalSpeed<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            y_mu: DVector::zeros(dim),
            y_sigma: T::zero(),
        }
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            y_mu: &self.y_mu * k,
            y_sigma: self.y_sigma * k,
        }
    }
}

/// `Y_μ = Σ ŵ_i (x_i − μ)`, `Y_σ = Σ ŵ_i (|x_i − μ|²/(2dσ) − σ/2)`.
pub fn igo_speed_spherical<T: Scalar>(
    state: &SphericalGaussianState<T>,
    samples: &[DVector<T>],
    w: &RankedWeights<T>,
) -> Result<SphericalSpeed<T>> {
    let d = state.dim();
    check_samples(d, samples, w)?;
    let sigma = state.sigma();
    let two_d_sigma = lit::<T>(2.0) * count::<T>(d) * sigma;
    let half_sigma = sigma * lit(0.5);
    let mut y_mu = DVector::zeros(d);
    let mut y_sigma = T::zero();
    for (x, &wi) in samples.iter().zip(w.as_slice()) {
        if wi == T::zero() {
            continue;
        }
        let dx = x - state.mean();
        y_sigma += wi * (dx.norm_squared() / two_d_sigma - half_sigma);
        y_mu += dx * wi;
    }
    Ok(SphericalSpeed { y_mu, y_sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    #[test]
    fn quantile_weights_example() {
        let scheme = SelectionScheme::truncation(0.5, 2.0);
        let w = compute_rank_weights(&[3.0, 1.0, 4.0, 2.0], &scheme).unwrap();
        assert_eq!(w.as_slice(), &[0.0, 0.5, 0.0, 0.5]);
    }

    #[test]
    fn constant_scheme_is_uniform() {
        let scheme = SelectionScheme::quantile(|_| 1.0);
        let w = compute_rank_weights(&[5.0, -1.0], &scheme).unwrap();
        assert_eq!(w.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn ties_share_weights() {
        let scheme = SelectionScheme::direct(vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        let w = compute_rank_weights(&[1.0, 1.0, 2.0, 3.0], &scheme).unwrap();
        // oracle: average over both orders of the tied pair
        let first = compute_rank_weights(&[1.0, 1.5, 2.0, 3.0], &scheme).unwrap();
        let second = compute_rank_weights(&[1.5, 1.0, 2.0, 3.0], &scheme).unwrap();
        for i in 0..4 {
            assert_eq!(w.as_slice()[i], 0.5 * (first.as_slice()[i] + second.as_slice()[i]));
        }
        assert_eq!(w.as_slice(), &[2.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn nan_fitness_is_rejected() {
        let scheme = SelectionScheme::quantile(|_| 1.0);
        assert!(matches!(
            compute_rank_weights(&[1.0, f64::NAN], &scheme),
            Err(GigoError::Input(_))
        ));
    }

    #[test]
    fn direct_weights_checked() {
        assert!(SelectionScheme::direct(vec![0.0, 1.0]).is_err());
        let scheme = SelectionScheme::direct(vec![1.0, 0.0]).unwrap();
        assert!(compute_rank_weights(&[1.0, 2.0, 3.0], &scheme).is_err());
    }

    #[test]
    fn full_speed_examples() {
        let s = GaussianState::<f64>::standard(1);
        let one = RankedWeights::from_aligned(vec![1.0]);
        let y = igo_speed_full(&s, &[v(&[0.0])], &one).unwrap();
        assert_eq!(y.v_mu, v(&[0.0]));
        assert_eq!(y.v_sigma, DMatrix::from_element(1, 1, -1.0));

        let half = RankedWeights::from_aligned(vec![0.5, 0.5]);
        let y = igo_speed_full(&s, &[v(&[1.0]), v(&[-1.0])], &half).unwrap();
        assert_eq!(y.v_mu[0], 0.0);
        assert_eq!(y.v_sigma[(0, 0)], 0.0);

        let top = RankedWeights::from_aligned(vec![1.0, 0.0]);
        let y = igo_speed_full(&s, &[v(&[2.0]), v(&[-1.0])], &top).unwrap();
        assert_eq!(y.v_mu[0], 2.0);
        assert_eq!(y.v_sigma[(0, 0)], 3.0);
    }

    #[test]
    fn spherical_speed_examples() {
        let one = RankedWeights::from_aligned(vec![1.0]);
        let s = SphericalGaussianState::new(v(&[0.0]), 1.0).unwrap();
        let y = igo_speed_spherical(&s, &[v(&[0.0])], &one).unwrap();
        assert_eq!(y.y_mu, v(&[0.0]));
        assert_eq!(y.y_sigma, -0.5);

        let x = 2f64.sqrt();
        let y = igo_speed_spherical(&s, &[v(&[x])], &one).unwrap();
        assert_eq!(y.y_mu[0], x);
        assert!((y.y_sigma - 0.5).abs() < 1e-15);

        let s2 = SphericalGaussianState::new(v(&[0.0, 0.0]), 1.0).unwrap();
        let y = igo_speed_spherical(&s2, &[v(&[1.0, 1.0])], &one).unwrap();
        assert_eq!(y.y_mu, v(&[1.0, 1.0]));
        assert_eq!(y.y_sigma, 0.0);
    }

    fn fitness_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-50.0f64..50.0, 1..20)
    }

    proptest! {
        #[test]
        fn monotone_transform_leaves_weights_unchanged(f in fitness_strategy()) {
            let scheme = SelectionScheme::truncation(0.3, 1.0);
            let g: Vec<f64> = f.iter().map(|x| x.powi(3) + 2.0 * x).collect();
            prop_assert_eq!(
                compute_rank_weights(&f, &scheme).unwrap(),
                compute_rank_weights(&g, &scheme).unwrap()
            );
        }

        #[test]
        fn weights_are_permutation_equivariant(f in fitness_strategy(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let scheme = SelectionScheme::truncation(0.5, 2.0);
            let mut perm: Vec<usize> = (0..f.len()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let g: Vec<f64> = perm.iter().map(|&i| f[i]).collect();
            let wf = compute_rank_weights(&f, &scheme).unwrap();
            let wg = compute_rank_weights(&g, &scheme).unwrap();
            for (j, &i) in perm.iter().enumerate() {
                prop_assert_eq!(wg.as_slice()[j], wf.as_slice()[i]);
            }
        }

        #[test]
        fn tie_averaging_preserves_weight_sum(ties in prop::collection::vec(0u8..3, 2..12)) {
            let f: Vec<f64> = ties.iter().map(|&t| t as f64).collect();
            let n = f.len();
            let direct: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
            let scheme = SelectionScheme::direct(direct.clone()).unwrap();
            let w = compute_rank_weights(&f, &scheme).unwrap();
            let total: f64 = direct.iter().sum();
            prop_assert!((w.sum() - total).abs() < 1e-12 * total);
        }

        #[test]
        fn full_speed_is_exactly_symmetric(
            pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..8),
        ) {
            let s = GaussianState::from_cov(
                v(&[0.1, -0.2, 0.3]),
                DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 1.5]),
            ).unwrap();
            let xs: Vec<_> = pts.iter().map(|p| v(p)).collect();
            let n = xs.len() as f64;
            let w = RankedWeights::from_aligned((0..xs.len()).map(|i| 1.0 / n - i as f64 * 0.01).collect());
            let y = igo_speed_full(&s, &xs, &w).unwrap();
            prop_assert_eq!(y.v_sigma.clone(), y.v_sigma.transpose());
        }

        #[test]
        fn full_and_spherical_mean_speeds_agree(
            pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 1..8),
            sigma in 0.2f64..3.0,
        ) {
            let mean = v(&[0.5, -1.0]);
            let sph = SphericalGaussianState::new(mean.clone(), sigma).unwrap();
            // symmetrise the sample set around the mean
            let mut xs: Vec<DVector<f64>> = pts.iter().map(|p| v(p)).collect();
            xs.extend(pts.iter().map(|p| &mean * 2.0 - v(p)));
            let w = RankedWeights::from_aligned((0..xs.len()).map(|i| 1.0 / (1.0 + i as f64)).collect());
            let full = igo_speed_full(&sph.to_full(), &xs, &w).unwrap();
            let sp = igo_speed_spherical(&sph, &xs, &w).unwrap();
            prop_assert!((full.v_mu - sp.y_mu).amax() < 1e-12);
        }

        #[test]
        fn zero_weights_give_zero_speed(pts in prop::collection::vec(-5.0f64..5.0, 1..8)) {
            let s = GaussianState::<f64>::standard(1);
            let xs: Vec<_> = pts.iter().map(|&p| v(&[p])).collect();
            let w = RankedWeights::from_aligned(vec![0.0; xs.len()]);
            prop_assert!(igo_speed_full(&s, &xs, &w).unwrap().is_zero());
            let sph = SphericalGaussianState::new(v(&[0.0]), 1.0).unwrap();
            prop_assert_eq!(igo_speed_spherical(&sph, &xs, &w).unwrap(), SphericalSpeed::zeros(1));
        }
    }
}
