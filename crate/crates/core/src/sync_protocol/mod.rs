//! Two-node feedback synchronization.
//!
//! Each node writes until its herald detector clicks, then holds the spin
//! excitation and tells the peer it is ready. Once both are ready, the nodes
//! read simultaneously `dt_read` later. This module holds the closed-form
//! four-fold coincidence probability and an event-driven simulator of the
//! same protocol.

mod campaign;
mod closed_form;
mod decay;
mod sim;

pub use campaign::{simulate_campaign, simulate_trials, CoincidenceStats};
pub use closed_form::{enhancement_factor, p4c_feedback_closed_form, p4c_no_feedback};
pub use decay::{memory_retrieval_efficiency, DecayModel};
pub use sim::{
    run_protocol_trial, run_protocol_trial_traced, NodeId, NodeState, Phase, TraceEvent,
    TrialOutcome,
};

use serde::Serialize;

use crate::error::{check_nonneg, check_positive, DomainError};
use crate::photon_statistics::{stokes_click_probability, ResolvedSource, SourceParams};

/// Timing, budget and source parameters shared by both nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolParams {
    /// Write attempts per node per trial (N).
    pub n_write_max: u32,
    /// Spacing of write attempts.
    pub dt_write_ns: f64,
    /// Delay from mutual agreement to the simultaneous read.
    pub dt_read_ns: f64,
    /// Memory lifetime.
    pub tau_c_us: f64,
    pub decay_model: DecayModel,
    /// One-way sync message latency.
    pub latency_ns: f64,
    pub source_a: SourceParams,
    pub source_b: SourceParams,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self::operating_point()
    }
}

impl ProtocolParams {
    /// Operating point of the two-ensemble experiment: N = 12, 800 ns write
    /// spacing, 400 ns read delay, 12 us lifetime, p_AS = 2e-3, gamma(0) = 8 %.
    pub fn operating_point() -> Self {
        Self {
            n_write_max: 12,
            dt_write_ns: 800.0,
            dt_read_ns: 400.0,
            tau_c_us: 12.0,
            decay_model: DecayModel::GaussianHalf,
            latency_ns: 0.0,
            source_a: SourceParams::ideal(2.0e-3, 0.08),
            source_b: SourceParams::ideal(2.0e-3, 0.08),
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.n_write_max < 1 {
            return Err(DomainError::OutOfRange {
                name: "n_write_max",
                value: self.n_write_max as f64,
                range: "[1, inf)",
            });
        }
        check_positive("dt_write_ns", self.dt_write_ns)?;
        check_nonneg("dt_read_ns", self.dt_read_ns)?;
        check_positive("tau_c_us", self.tau_c_us)?;
        check_nonneg("latency_ns", self.latency_ns)?;
        Ok(())
    }

    pub fn resolve(&self) -> Result<ResolvedProtocol, DomainError> {
        self.validate()?;
        Ok(ResolvedProtocol {
            n_write_max: self.n_write_max,
            dt_write_ns: self.dt_write_ns,
            dt_read_ns: self.dt_read_ns,
            tau_c_ns: self.tau_c_us * 1e3,
            decay_model: self.decay_model,
            latency_ns: self.latency_ns,
            sources: [self.source_a.resolve()?, self.source_b.resolve()?],
        })
    }
}

/// Validated protocol with sources reduced to herald probability and
/// stored-excitation statistics.
#[derive(Debug, Clone)]
pub struct ResolvedProtocol {
    pub n_write_max: u32,
    pub dt_write_ns: f64,
    pub dt_read_ns: f64,
    pub tau_c_ns: f64,
    pub decay_model: DecayModel,
    pub latency_ns: f64,
    pub sources: [ResolvedSource; 2],
}

impl ResolvedProtocol {
    pub fn gamma(&self, node: usize, hold_ns: f64) -> f64 {
        self.sources[node].gamma0 * self.decay_model.factor(hold_ns, self.tau_c_ns)
    }

    /// Probability of at least one Stokes photon from `node` after `hold_ns`.
    /// Equals `gamma(hold)` when the herald stores exactly one excitation.
    pub fn stokes_success(&self, node: usize, hold_ns: f64) -> f64 {
        let g = self.gamma(node, hold_ns);
        stokes_click_probability(&self.sources[node].excitation, g)
            .expect("gamma is within [0, 1] by construction")
    }

    /// Hold time of the later-heralding node (also both nodes on a tie).
    pub fn base_hold_ns(&self) -> f64 {
        self.dt_read_ns + 2.0 * self.latency_ns
    }
}
