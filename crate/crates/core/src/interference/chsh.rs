//! Post-selected two-photon state and CHSH estimation.
//!
//! Source 1 is prepared H and source 2 V. A coincidence behind the beam
//! splitter projects the single-photon pair onto the singlet; double
//! emissions from source 1 (2) leave `|HH>` (`|VV>`). Correlations use the
//! singlet convention `E = -cos 2(theta1 - theta2)` and the combination
//! `S = |E11 - E12 - E21 - E22|`.

use std::f64::consts::SQRT_2;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_nonneg, check_unit, DomainError};
use crate::rng::substream;

/// Local-realist bound on S.
pub const CLASSICAL_BOUND: f64 = 2.0;
/// Quantum bound `2 sqrt(2)`.
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;

/// Mixture weights of the post-selected state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveTwoPhotonState {
    pub w_singlet: f64,
    pub w_hh: f64,
    pub w_vv: f64,
}

impl EffectiveTwoPhotonState {
    pub fn singlet() -> Self {
        Self {
            w_singlet: 1.0,
            w_hh: 0.0,
            w_vv: 0.0,
        }
    }

    pub fn from_weights(singlet: f64, hh: f64, vv: f64) -> Result<Self, DomainError> {
        check_nonneg("w_singlet", singlet)?;
        check_nonneg("w_hh", hh)?;
        check_nonneg("w_vv", vv)?;
        let total = singlet + hh + vv;
        if total <= 0.0 {
            return Err(DomainError::ZeroProbability("all state weights are zero"));
        }
        Ok(Self {
            w_singlet: singlet / total,
            w_hh: hh / total,
            w_vv: vv / total,
        })
    }

    pub fn noise(&self) -> f64 {
        self.w_hh + self.w_vv
    }

    /// Outcome probabilities `[++, +-, -+, --]` for analyzers at `theta1`, `theta2` (degrees).
    pub fn joint_probabilities(&self, theta1: f64, theta2: f64) -> [f64; 4] {
        let (a, b) = (theta1.to_radians(), theta2.to_radians());
        let (c1, s1) = (a.cos().powi(2), a.sin().powi(2));
        let (c2, s2) = (b.cos().powi(2), b.sin().powi(2));
        let d = a - b;
        let same = 0.5 * d.sin().powi(2);
        let diff = 0.5 * d.cos().powi(2);
        let ws = self.w_singlet;
        [
            ws * same + self.w_hh * c1 * c2 + self.w_vv * s1 * s2,
            ws * diff + self.w_hh * c1 * s2 + self.w_vv * s1 * c2,
            ws * diff + self.w_hh * s1 * c2 + self.w_vv * c1 * s2,
            ws * same + self.w_hh * s1 * s2 + self.w_vv * c1 * c2,
        ]
    }
}

/// State created from sources with anti-correlation `alpha_k` and
/// one-photon probability `p_i_k`.
pub fn effective_state(
    alpha1: f64,
    alpha2: f64,
    p_i1: f64,
    p_i2: f64,
) -> Result<EffectiveTwoPhotonState, DomainError> {
    check_nonneg("alpha1", alpha1)?;
    check_nonneg("alpha2", alpha2)?;
    check_unit("p_i1", p_i1)?;
    check_unit("p_i2", p_i2)?;
    let p_ii1 = alpha1 * p_i1 * p_i1 / 2.0;
    let p_ii2 = alpha2 * p_i2 * p_i2 / 2.0;
    EffectiveTwoPhotonState::from_weights(p_i1 * p_i2 / 2.0, p_ii1 / 2.0, p_ii2 / 2.0)
}

/// Polarization correlation `E(theta1, theta2)`, angles in degrees.
pub fn correlation(state: &EffectiveTwoPhotonState, theta1: f64, theta2: f64) -> f64 {
    let (a, b) = (theta1.to_radians(), theta2.to_radians());
    -state.w_singlet * (2.0 * (a - b)).cos() + state.noise() * (2.0 * a).cos() * (2.0 * b).cos()
}

/// Analyzer angles `(theta1, theta1')` at port 3 and `(theta2, theta2')` at port 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleSet {
    pub theta1: f64,
    pub theta1p: f64,
    pub theta2: f64,
    pub theta2p: f64,
}

impl AngleSet {
    /// Maximizes S for the singlet under this sign pattern.
    pub fn optimal() -> Self {
        Self {
            theta1: 0.0,
            theta1p: 45.0,
            theta2: 67.5,
            theta2p: 22.5,
        }
    }

    /// Settings used in the two-ensemble measurement: 0/45 and +-22.5 degrees.
    pub fn experiment() -> Self {
        Self {
            theta1: 0.0,
            theta1p: 45.0,
            theta2: 22.5,
            theta2p: -22.5,
        }
    }

    /// Settings in combination order `E11, E12, E21, E22`.
    pub fn settings(&self) -> [(f64, f64); 4] {
        [
            (self.theta1, self.theta2),
            (self.theta1, self.theta2p),
            (self.theta1p, self.theta2),
            (self.theta1p, self.theta2p),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshResult {
    pub e: [f64; 4],
    pub sigma_e: Option<[f64; 4]>,
    pub s: f64,
    pub sigma_s: Option<f64>,
    /// `(S - 2) / sigma_S`
    pub n_sigma: Option<f64>,
}

/// Combines four correlations into S, propagating errors in quadrature.
pub fn chsh_from_correlations(
    e: [f64; 4],
    sigmas: Option<[f64; 4]>,
) -> Result<ChshResult, DomainError> {
    for &x in &e {
        if !(-1.0..=1.0).contains(&x) {
            return Err(DomainError::OutOfRange {
                name: "correlation",
                value: x,
                range: "[-1, 1]",
            });
        }
    }
    if let Some(sig) = sigmas {
        for &x in &sig {
            check_nonneg("sigma_e", x)?;
        }
    }
    let s = (e[0] - e[1] - e[2] - e[3]).abs();
    let sigma_s = sigmas.map(|sig| sig.iter().map(|x| x * x).sum::<f64>().sqrt());
    let n_sigma = sigma_s.and_then(|sd| (sd > 0.0).then(|| (s - CLASSICAL_BOUND) / sd));
    Ok(ChshResult {
        e,
        sigma_e: sigmas,
        s,
        sigma_s,
        n_sigma,
    })
}

/// Noise-free S of `state` at `angles`.
pub fn chsh_for_state(state: &EffectiveTwoPhotonState, angles: &AngleSet) -> ChshResult {
    let e = angles.settings().map(|(a, b)| correlation(state, a, b));
    chsh_from_correlations(e.map(|x| x.clamp(-1.0, 1.0)), None).expect("correlations are bounded")
}

/// S at the optimal angles for mean anti-correlation `alpha_bar`:
/// `(2 sqrt 2 - sqrt 2 alpha) / (1 + alpha)`.
#[allow(non_snake_case)]
pub fn predicted_S(alpha_bar: f64) -> Result<f64, DomainError> {
    check_nonneg("alpha_bar", alpha_bar)?;
    Ok((TSIRELSON_BOUND - SQRT_2 * alpha_bar) / (1.0 + alpha_bar))
}

/// Largest mean alpha that still violates the classical bound.
pub fn alpha_violation_threshold() -> f64 {
    (TSIRELSON_BOUND - CLASSICAL_BOUND) / (CLASSICAL_BOUND + SQRT_2)
}

/// Counts and estimate of one analyzer setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SettingCounts {
    pub theta1: f64,
    pub theta2: f64,
    pub n_pp: u64,
    pub n_pm: u64,
    pub n_mp: u64,
    pub n_mm: u64,
    pub e: f64,
    pub sigma_e: f64,
}

impl SettingCounts {
    pub fn from_counts(theta1: f64, theta2: f64, counts: [u64; 4]) -> Self {
        let [n_pp, n_pm, n_mp, n_mm] = counts;
        let n = (n_pp + n_pm + n_mp + n_mm) as f64;
        let e = ((n_pp + n_mm) as f64 - (n_pm + n_mp) as f64) / n;
        Self {
            theta1,
            theta2,
            n_pp,
            n_pm,
            n_mp,
            n_mm,
            e,
            sigma_e: ((1.0 - e * e) / n).sqrt(),
        }
    }

    pub fn total(&self) -> u64 {
        self.n_pp + self.n_pm + self.n_mp + self.n_mm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledChsh {
    pub settings: [SettingCounts; 4],
    pub result: ChshResult,
}

/// Draws `n_events_per_setting` coincidences per setting from the state's
/// joint outcome distribution; setting `k` uses substream `(seed, k)`.
pub fn sample_chsh_experiment(
    state: &EffectiveTwoPhotonState,
    angles: &AngleSet,
    n_events_per_setting: u64,
    seed: u64,
) -> Result<SampledChsh, DomainError> {
    if n_events_per_setting == 0 {
        return Err(DomainError::OutOfRange {
            name: "n_events_per_setting",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    let settings = angles.settings();
    let counted: Vec<SettingCounts> = settings
        .par_iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let p = state.joint_probabilities(a, b);
            let cdf = [p[0], p[0] + p[1], p[0] + p[1] + p[2]];
            let mut rng = substream(seed, k as u64);
            let mut counts = [0u64; 4];
            for _ in 0..n_events_per_setting {
                let u: f64 = rng.random();
                let slot = if u < cdf[0] {
                    0
                } else if u < cdf[1] {
                    1
                } else if u < cdf[2] {
                    2
                } else {
                    3
                };
                counts[slot] += 1;
            }
            SettingCounts::from_counts(a, b, counts)
        })
        .collect();
    let settings: [SettingCounts; 4] = counted.try_into().expect("four settings");
    let result = chsh_from_correlations(settings.map(|c| c.e), Some(settings.map(|c| c.sigma_e)))?;
    Ok(SampledChsh { settings, result })
}
