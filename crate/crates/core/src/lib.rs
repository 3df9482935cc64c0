//! Nonatomic congestion games on directed networks.
//!
//! The crate covers the whole chain from a network description to the
//! stochastic analysis of learning:
//!
//! * [`net`]: networks, flows, loads, redundancy, projective distance and
//!   essence;
//! * [`latency`]: latency families and the scalar functionals of a flow
//!   (delays, Rosenthal potential, adjoint potential, relative entropy);
//! * [`equilibria`]: Wardrop equilibria and social optima by Frank–Wolfe,
//!   with certificates and classification;
//! * [`dynamics`]: replicator and BNN ODEs, the stochastic replicator SDE,
//!   exponential learning and the entropy generator;
//! * [`experiments`]: Monte Carlo checks of stability, hitting times and
//!   invariant-measure concentration;
//! * [`io`]: JSON configs, built-in examples, trajectory CSV and manifests;
//! * [`generators`]: random networks, flows and rays for property checks;
//! * [`rng`]: seeded, stream-indexed random number generators.

pub mod dynamics;
pub mod equilibria;
mod error;
pub mod experiments;
pub mod generators;
pub mod io;
pub mod latency;
pub mod net;
pub mod rng;

pub use error::{Error, Result};
