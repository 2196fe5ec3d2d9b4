//! Cluster shift keying (CLSK) laboratory.
//!
//! Symbols are encoded as cluster-synchronization patterns of a network of
//! diffusively coupled Chen oscillators. The transmitter switches a few
//! couplings (or a pinning control network) to select the pattern; the
//! receiver decides which pattern is present from synchronization-error
//! energies between its own nodes. The signals on the links joining the two
//! halves stay chaotic for every symbol.
//!
//! Module map:
//!
//! - [`dynsys`]: node model, RK4 integration, largest Lyapunov exponent and
//!   master stability function.
//! - [`topology`]: coupling matrices, permutation symmetries, block
//!   diagonalization, stability ranges, control networks, design checks and
//!   the network description file.
//! - [`netsim`]: deterministic and stochastic integration of the whole network.
//! - [`modem`]: symbol scheduling, transmission and the energy-threshold
//!   detector.
//! - [`baselines`]: CSK and DCSK over AWGN.
//! - [`bench`]: Monte Carlo BER sweeps, bit-count schedules, spectrograms and
//!   result files.

pub mod baselines;
pub mod bench;
pub mod dynsys;
mod error;
pub mod modem;
pub mod netsim;
mod par;
pub mod rng;
pub mod topology;

pub use error::{Error, Result};
