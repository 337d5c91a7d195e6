//! Simulation and verification toolkit for rate-constrained wireless dipole
//! networks.
//!
//! Receivers form a Poisson field of intensity `n`; each carries a nearby
//! transmitter. Direct links see Rayleigh fading only, while interference
//! combines fading with `D^-alpha` path loss inside unit distance, which
//! makes interference gains heavy-tailed with index `2/alpha`. The crate
//! samples such networks, activates links under a minimum-rate constraint,
//! checks the supporting limit theorems by Monte Carlo, and drives sweeps
//! that measure how the number of active links grows with `n`.

// `!(x > 0.0)` is the NaN-rejecting form used for parameter checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod activation;
pub mod asymptotics;
pub mod channel;
pub mod error;
pub mod field;
pub mod harness;
pub mod params;
pub mod rng;
pub mod stats;

pub use activation::{ActivationResult, Solver};
pub use channel::{ChannelRealization, Propagation, TailLaw};
pub use error::{Error, Result};
pub use field::{Dipole, DipoleField, Point2};
pub use params::NetworkParams;
