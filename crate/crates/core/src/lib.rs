//! Macroscopic replicator-dynamics models of robot teams that switch tasks
//! through pairwise encounters, simulated at three levels of fidelity:
//!
//! * [`odeint`]: deterministic reference trajectories from the replicator
//!   equations (fixed-step RK4);
//! * [`ssa`]: Gillespie simulation of the pairwise jump process on integer
//!   task counts;
//! * [`micro`]: point-particle agents in a 2D arena whose interaction radii
//!   are derived from the macroscopic rates.
//!
//! All three can be driven by the trajectory-tracking collaboration rate
//! `alpha_ij (Y*_i / Y_i - 1)` ([`ensemble::feedback_rate`]).
//! [`experiment`] ties them together behind a TOML configuration with
//! multi-trial seeded execution and tracking metrics.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod micro;
pub mod odeint;
pub mod rng;
pub mod ssa;

pub use error::{Error, Result};

/// Version string written into output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
