//! Geodesics of the Gaussian manifolds under the twisted Fisher metric.
//!
//! Every map here takes the raw IGO speed `(v_μ, v_Σ)` together with the
//! learning rates; the geodesic's initial velocity is `(η_μ·v_μ, η_Σ·v_Σ)`
//! and it is followed for time `dt`.

mod euler;
mod exact;
mod hyperbolic;
mod noether;

pub use euler::{gigo_a_exp, gigo_sigma_exp, integrate_gigo_a, integrate_gigo_sigma, EulerConfig};
pub use exact::{exact_exp, taylor_ch_shc};
pub use hyperbolic::{hyperbolic_params, separable_exp, spherical_exp, HyperbolicGeodesicParams};
pub use noether::{noether_invariants, NoetherInvariants};
