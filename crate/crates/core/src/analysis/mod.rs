//! Closed-form analysis: update paths and their curvature, and the large-population
//! behaviour on linear objectives.

mod linear_flow;
pub mod special;
mod trajectory;

pub use linear_flow::{
    critical_dt, linear_flow_alpha_beta, linear_igo_flow, linear_igo_speed, CriticalDt, CriticalDtInputs,
};
pub use trajectory::{second_derivatives, trajectory, SecondDerivatives, TrajectoryKind, TrajectoryPoint};
