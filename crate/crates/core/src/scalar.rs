//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating point type the optimizers and geodesic maps are generic over.
///
/// Implemented for `f32` and `f64`. The associated constants carry the
/// precision-dependent thresholds (degeneracy of a covariance root, Taylor
/// truncation) so generic code never hard-codes an `f64` epsilon.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + std::fmt::Debug + std::fmt::Display + 'static
{
    /// A covariance root whose smallest singular value falls below this
    /// fraction of its largest one is treated as degenerate.
    const DEGENERACY_RATIO: f64;

    /// Relative truncation threshold for the even Taylor series of `ch`/`sh`.
    const SERIES_TOL: f64;

    /// Draws one standard normal variate.
    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    const DEGENERACY_RATIO: f64 = 1e-12;
    const SERIES_TOL: f64 = f64::EPSILON;

    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Scalar for f32 {
    const DEGENERACY_RATIO: f64 = 1e-6;
    const SERIES_TOL: f64 = f32::EPSILON as f64;

    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into the working scalar.
#[inline]
pub fn count<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// Lossy conversion back to `f64` for reporting.
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
