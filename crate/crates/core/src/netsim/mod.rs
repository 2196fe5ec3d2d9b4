//! Deterministic and stochastic integration of coupled networks with
//! optional pinning control.

mod scan;
mod sde;
mod system;
mod trajectory;

pub use scan::{spatiotemporal_scan, ScanOptions, ScanPoint};
pub use sde::{sde_step, wiener_pair, NoiseColumns, SdeScheme, SdeWork};
pub use system::{
    integrate_network, integrate_network_sde, integrate_sde_with_rng, network_rhs, random_state, NetSystem,
    NetworkState, NoiseConfig, NoiseSource, PinNoise, SimOptions,
};
pub use trajectory::{sync_error_series, Trajectory};
