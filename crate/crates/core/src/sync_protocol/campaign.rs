use rayon::prelude::*;
use serde::Serialize;

use super::sim::{TrialOutcome, TrialSimulator};
use super::ProtocolParams;
use crate::error::DomainError;
use crate::rng::substream;

const CHUNK: u64 = 1 << 16;

/// Aggregated four-fold coincidence counts of a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoincidenceStats {
    pub trials: u64,
    pub four_fold_count: u64,
    pub p4c_hat: f64,
    /// Binomial standard error `sqrt(p (1 - p) / trials)` at `p4c_hat`.
    pub std_err: f64,
}

impl CoincidenceStats {
    pub fn from_counts(trials: u64, four_fold_count: u64) -> Self {
        let p = four_fold_count as f64 / trials as f64;
        Self {
            trials,
            four_fold_count,
            p4c_hat: p,
            std_err: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

/// Runs `n_trials` independent trials; trial `k` draws from substream `(seed, k)`.
pub fn simulate_campaign(
    params: &ProtocolParams,
    n_trials: u64,
    seed: u64,
) -> Result<CoincidenceStats, DomainError> {
    if n_trials == 0 {
        return Err(DomainError::OutOfRange {
            name: "n_trials",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    let proto = params.resolve()?;
    let chunks = n_trials.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sim = TrialSimulator::new(&proto);
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n_trials);
            (start..end)
                .filter(|&k| sim.run(&mut substream(seed, k), None).four_fold)
                .count() as u64
        })
        .sum();
    Ok(CoincidenceStats::from_counts(n_trials, hits))
}

/// Per-trial outcomes in trial order, using the same substreams as
/// [`simulate_campaign`].
pub fn simulate_trials(
    params: &ProtocolParams,
    n_trials: u64,
    seed: u64,
) -> Result<Vec<TrialOutcome>, DomainError> {
    if n_trials == 0 {
        return Err(DomainError::OutOfRange {
            name: "n_trials",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    let proto = params.resolve()?;
    let mut sim = TrialSimulator::new(&proto);
    Ok((0..n_trials)
        .map(|k| sim.run(&mut substream(seed, k), None))
        .collect())
}
