//! Single-node dynamics, fixed-step integration and the master stability
//! function.

mod lyapunov;
mod model;
mod ode;

pub use lyapunov::{max_lyapunov, msf_sweep, LyapunovOptions, MsfCurve};
pub use model::{chen_flow, chen_jacobian, NodeModel};
pub use ode::{
    check_bound, integrate_ode, integrate_ode_with, rk4_step, OdeOptions, Rk4Work, DEFAULT_DIVERGENCE_BOUND,
};

use nalgebra::Matrix3;

/// Inner coupling matrix used by both worked examples: component 1 of a
/// neighbour drives component 2 of the node.
pub fn example_gamma() -> Matrix3<f64> {
    Matrix3::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
}
