//! Geodesic IGO on Gaussian distributions, with xNES, pure rank-μ CMA-ES and blockwise GIGO.
//!
//! Every optimizer follows the same loop: sample a population from the current Gaussian,
//! rank it, turn the ranks into weights, compute the natural-gradient speed, and move the
//! distribution. The variants differ only in how the last move is made: along the Fisher
//! geodesic (GIGO, integrated or exact), along straight lines in some chart (CMA-ES), or
//! through the exponential parametrisation (xNES).
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the benchmark harness
//! and the closed-form analysis work in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bench;
pub mod error;
pub mod geodesics;
pub mod igo;
pub mod linalg;
pub mod manifold;
pub mod optimizers;
pub mod scalar;

pub use error::{GigoError, Result};
pub use geodesics::{exact_exp, gigo_a_exp, gigo_sigma_exp, noether_invariants, spherical_exp, EulerConfig};
pub use igo::{compute_rank_weights, igo_speed_full, igo_speed_spherical, SelectionScheme};
pub use manifold::{GaussianState, LearningRates, SphericalGaussianState, TangentVector};
pub use optimizers::{run, Algorithm, OptimizerConfig, RunOptions, RunRecord, SearchDistribution};
pub use scalar::Scalar;

pub type GaussianState64 = GaussianState<f64>;
pub type GaussianState32 = GaussianState<f32>;
pub type SphericalGaussianState64 = SphericalGaussianState<f64>;
pub type SphericalGaussianState32 = SphericalGaussianState<f32>;
pub type TangentVector64 = TangentVector<f64>;
pub type TangentVector32 = TangentVector<f32>;
pub type LearningRates64 = LearningRates<f64>;
pub type LearningRates32 = LearningRates<f32>;
pub type OptimizerConfig64 = OptimizerConfig<f64>;
pub type OptimizerConfig32 = OptimizerConfig<f32>;
pub type RunRecord64 = RunRecord<f64>;
pub type RunRecord32 = RunRecord<f32>;
