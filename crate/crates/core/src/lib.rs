//! Simulator and analytics for two synchronized heralded single-photon
//! sources with quantum memory.
//!
//! * [`photon_statistics`]: emission, heralding, retrieval and the
//!   anti-correlation parameter of one ensemble.
//! * [`sync_protocol`]: the two-node feedback protocol, its closed-form
//!   four-fold coincidence probability and an event-driven Monte Carlo.
//! * [`interference`]: Hong-Ou-Mandel dips and CHSH Bell tests on the
//!   post-selected two-photon state.
//! * [`harness`]: config parsing, the scenario registry and output files.

pub mod error;
pub mod harness;
pub mod interference;
pub mod photon_statistics;
pub mod rng;
pub mod sync_protocol;

pub use error::DomainError;
