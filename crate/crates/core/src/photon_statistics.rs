//! Number statistics of the write / herald / read chain of a single ensemble.
//!
//! The write pulse produces correlated anti-Stokes photons and spin
//! excitations with amplitudes `1, sqrt(chi), chi` for `n = 0, 1, 2`; the
//! Fock space is truncated at two quanta. A bucket detector with efficiency
//! `eta_as` heralds the excitation, and retrieval is a binomial loss channel.

use serde::Serialize;

use crate::error::{check_unit, DomainError};

/// Highest photon / excitation number kept.
pub const MAX_QUANTA: usize = 2;

const NORM_TOL: f64 = 1e-12;

/// Probability vector over `n = 0, 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockDistribution {
    p: [f64; MAX_QUANTA + 1],
}

impl FockDistribution {
    pub fn new(p: [f64; MAX_QUANTA + 1]) -> Result<Self, DomainError> {
        for &x in &p {
            check_unit("fock probability", x)?;
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(DomainError::OutOfRange {
                name: "fock normalization",
                value: total,
                range: "1 +/- 1e-12",
            });
        }
        Ok(Self { p })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(w: [f64; MAX_QUANTA + 1]) -> Result<Self, DomainError> {
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(DomainError::Unsupported(format!(
                "negative or non-finite Fock weight in {w:?}"
            )));
        }
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            return Err(DomainError::ZeroProbability("all Fock weights are zero"));
        }
        Ok(Self {
            p: w.map(|x| x / total),
        })
    }

    pub fn vacuum() -> Self {
        Self { p: [1.0, 0.0, 0.0] }
    }

    pub fn single() -> Self {
        Self { p: [0.0, 1.0, 0.0] }
    }

    pub fn probs(&self) -> &[f64; MAX_QUANTA + 1] {
        &self.p
    }

    pub fn get(&self, n: usize) -> f64 {
        self.p[n]
    }

    /// Probability of at least one quantum.
    pub fn nonvacuum(&self) -> f64 {
        self.p[1] + self.p[2]
    }
}

/// Emission statistics of one write pulse with spin-flip probability `chi`.
pub fn emission_distribution(chi: f64) -> Result<FockDistribution, DomainError> {
    if !(0.0..1.0).contains(&chi) {
        return Err(DomainError::OutOfRange {
            name: "chi",
            value: chi,
            range: "[0, 1)",
        });
    }
    FockDistribution::from_weights([1.0, chi, chi * chi])
}

/// `1 - (1 - eff)^n`, written so `n = 1` returns `eff` exactly.
fn at_least_one(n: usize, eff: f64) -> f64 {
    match n {
        0 => 0.0,
        1 => eff,
        _ => eff * (2.0 - eff),
    }
}

fn click_given_n(n: usize, eta: f64, dark: f64) -> f64 {
    let signal = at_least_one(n, eta);
    signal + dark * (1.0 - signal)
}

/// Click probability of a bucket detector with efficiency `eta_as`.
pub fn herald_probability(dist: &FockDistribution, eta_as: f64) -> Result<f64, DomainError> {
    herald_probability_with_dark(dist, eta_as, 0.0)
}

/// As [`herald_probability`], with an independent dark-click probability per attempt.
pub fn herald_probability_with_dark(
    dist: &FockDistribution,
    eta_as: f64,
    dark: f64,
) -> Result<f64, DomainError> {
    check_unit("eta_as", eta_as)?;
    check_unit("dark_click", dark)?;
    Ok((0..=MAX_QUANTA)
        .map(|n| dist.p[n] * click_given_n(n, eta_as, dark))
        .sum())
}

/// Spin-excitation statistics conditioned on a herald click.
pub fn heralded_excitation_distribution(
    dist: &FockDistribution,
    eta_as: f64,
) -> Result<FockDistribution, DomainError> {
    heralded_excitation_distribution_with_dark(dist, eta_as, 0.0)
}

pub fn heralded_excitation_distribution_with_dark(
    dist: &FockDistribution,
    eta_as: f64,
    dark: f64,
) -> Result<FockDistribution, DomainError> {
    check_unit("eta_as", eta_as)?;
    check_unit("dark_click", dark)?;
    let mut w = [0.0; MAX_QUANTA + 1];
    for (n, slot) in w.iter_mut().enumerate() {
        *slot = dist.p[n] * click_given_n(n, eta_as, dark);
    }
    if w.iter().sum::<f64>() <= 0.0 {
        return Err(DomainError::ZeroProbability("herald probability is zero"));
    }
    FockDistribution::from_weights(w)
}

fn binomial(n: usize, k: usize) -> f64 {
    match (n, k) {
        (_, 0) => 1.0,
        (n, k) if k == n => 1.0,
        (2, 1) => 2.0,
        _ => unreachable!("truncated at two quanta"),
    }
}

/// Photon statistics after each stored excitation survives retrieval with
/// probability `gamma`.
pub fn retrieve(spin_dist: &FockDistribution, gamma: f64) -> Result<FockDistribution, DomainError> {
    check_unit("gamma", gamma)?;
    let mut out = [0.0; MAX_QUANTA + 1];
    for n in 0..=MAX_QUANTA {
        for (k, slot) in out.iter_mut().enumerate().take(n + 1) {
            *slot += spin_dist.p[n]
                * binomial(n, k)
                * gamma.powi(k as i32)
                * (1.0 - gamma).powi((n - k) as i32);
        }
    }
    Ok(FockDistribution { p: out })
}

/// Probability that retrieval yields at least one photon.
pub fn stokes_click_probability(
    spin_dist: &FockDistribution,
    gamma: f64,
) -> Result<f64, DomainError> {
    check_unit("gamma", gamma)?;
    Ok((1..=MAX_QUANTA)
        .map(|n| spin_dist.p[n] * at_least_one(n, gamma))
        .sum())
}

/// Anti-correlation parameter `2 P2 / P1^2`.
pub fn alpha_of(photon_dist: &FockDistribution) -> Result<f64, DomainError> {
    let p1 = photon_dist.p[1];
    if p1 <= 0.0 {
        return Err(DomainError::Undefined(
            "alpha needs a nonzero one-photon probability",
        ));
    }
    Ok(2.0 * photon_dist.p[2] / (p1 * p1))
}

/// Physical parameters of one ensemble.
///
/// Three ways to specify the herald:
/// * `chi` and `eta_as`: herald probability and excitation shape follow from the model;
/// * `p_as` and `eta_as`: `chi` is solved so the model herald probability equals `p_as`;
/// * `p_as` alone: ideal heralding, the stored state is exactly one excitation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceParams {
    pub chi: Option<f64>,
    pub eta_as: Option<f64>,
    pub p_as: Option<f64>,
    pub gamma0: f64,
    pub alpha_override: Option<f64>,
    pub dark_click: f64,
}

impl SourceParams {
    /// Directly specified herald probability with ideal single-excitation heralding.
    pub fn ideal(p_as: f64, gamma0: f64) -> Self {
        Self {
            chi: None,
            eta_as: None,
            p_as: Some(p_as),
            gamma0,
            alpha_override: None,
            dark_click: 0.0,
        }
    }

    pub fn microscopic(chi: f64, eta_as: f64, gamma0: f64) -> Self {
        Self {
            chi: Some(chi),
            eta_as: Some(eta_as),
            p_as: None,
            gamma0,
            alpha_override: None,
            dark_click: 0.0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha_override = Some(alpha);
        self
    }

    pub fn resolve(&self) -> Result<ResolvedSource, DomainError> {
        check_unit("gamma0", self.gamma0)?;
        check_unit("dark_click", self.dark_click)?;
        if let Some(a) = self.alpha_override {
            crate::error::check_nonneg("alpha_override", a)?;
        }
        let dark = self.dark_click;
        let (chi, herald, excitation) = match (self.p_as, self.eta_as) {
            (Some(p_as), None) => {
                check_unit("p_as", p_as)?;
                let herald = p_as + dark * (1.0 - p_as);
                if herald <= 0.0 {
                    return Ok(ResolvedSource {
                        chi: None,
                        herald_probability: 0.0,
                        excitation: FockDistribution::single(),
                        gamma0: self.gamma0,
                        alpha_override: self.alpha_override,
                    });
                }
                let excitation = FockDistribution::from_weights([(1.0 - p_as) * dark, p_as, 0.0])?;
                (None, herald, excitation)
            }
            (Some(p_as), Some(eta)) => {
                check_unit("p_as", p_as)?;
                check_unit("eta_as", eta)?;
                let chi = solve_chi(p_as, eta, dark)?;
                let emitted = emission_distribution(chi)?;
                let herald = herald_probability_with_dark(&emitted, eta, dark)?;
                let excitation = if herald > 0.0 {
                    heralded_excitation_distribution_with_dark(&emitted, eta, dark)?
                } else {
                    FockDistribution::single()
                };
                (Some(chi), herald, excitation)
            }
            (None, eta) => {
                let chi = self.chi.ok_or_else(|| {
                    DomainError::Unsupported("source needs either p_as or chi".into())
                })?;
                let eta =
                    eta.ok_or_else(|| DomainError::Unsupported("chi given without eta_as".into()))?;
                let emitted = emission_distribution(chi)?;
                let herald = herald_probability_with_dark(&emitted, eta, dark)?;
                let excitation = if herald > 0.0 {
                    heralded_excitation_distribution_with_dark(&emitted, eta, dark)?
                } else {
                    FockDistribution::single()
                };
                (Some(chi), herald, excitation)
            }
        };
        Ok(ResolvedSource {
            chi,
            herald_probability: herald,
            excitation,
            gamma0: self.gamma0,
            alpha_override: self.alpha_override,
        })
    }
}

/// Inverts the (monotone) herald probability in `chi` by bisection on `[0, 1)`.
fn solve_chi(p_as: f64, eta: f64, dark: f64) -> Result<f64, DomainError> {
    let herald = |chi: f64| -> Result<f64, DomainError> {
        herald_probability_with_dark(&emission_distribution(chi)?, eta, dark)
    };
    let lo_val = herald(0.0)?;
    let mut hi = 1.0 - f64::EPSILON;
    let hi_val = herald(hi)?;
    if p_as < lo_val || p_as > hi_val {
        return Err(DomainError::OutOfRange {
            name: "p_as",
            value: p_as,
            range: "the herald probabilities reachable with chi in [0, 1)",
        });
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if herald(mid)? < p_as {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A [`SourceParams`] reduced to what the protocol needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedSource {
    pub chi: Option<f64>,
    pub herald_probability: f64,
    /// Stored spin-excitation statistics given a herald.
    pub excitation: FockDistribution,
    pub gamma0: f64,
    pub alpha_override: Option<f64>,
}

impl ResolvedSource {
    /// `alpha_override` if set, otherwise alpha of the retrieved photon at zero hold.
    pub fn alpha(&self) -> Result<f64, DomainError> {
        match self.alpha_override {
            Some(a) => Ok(a),
            None => alpha_of(&retrieve(&self.excitation, self.gamma0)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn emission_examples() {
        assert_eq!(
            emission_distribution(0.0).unwrap().probs(),
            &[1.0, 0.0, 0.0]
        );
        let d = emission_distribution(0.1).unwrap();
        for (got, want) in d.probs().iter().zip([0.900901, 0.090090, 0.009009]) {
            assert!(close(*got, want, 1e-6), "{got} vs {want}");
        }
        let d = emission_distribution(0.5).unwrap();
        for (got, want) in d.probs().iter().zip([0.571429, 0.285714, 0.142857]) {
            assert!(close(*got, want, 1e-6));
        }
    }

    #[test]
    fn emission_rejects_bad_chi() {
        assert!(emission_distribution(1.0).is_err());
        assert!(emission_distribution(-0.1).is_err());
        assert!(emission_distribution(f64::NAN).is_err());
    }

    #[test]
    fn herald_examples() {
        let d = emission_distribution(0.1).unwrap();
        assert_eq!(herald_probability(&d, 0.0).unwrap(), 0.0);
        assert!(close(herald_probability(&d, 1.0).unwrap(), 0.099099, 1e-6));
        assert!(close(herald_probability(&d, 0.5).unwrap(), 0.051802, 1e-6));
        assert!(herald_probability(&d, 1.5).is_err());
    }

    #[test]
    fn heralded_examples() {
        let d = emission_distribution(0.1).unwrap();
        let q = heralded_excitation_distribution(&d, 1.0).unwrap();
        assert_eq!(q.get(0), 0.0);
        assert!(close(q.get(1), 0.909091, 1e-6));
        assert!(close(q.get(2), 0.090909, 1e-6));
        assert!(matches!(
            heralded_excitation_distribution(&FockDistribution::vacuum(), 0.5),
            Err(DomainError::ZeroProbability(_))
        ));
    }

    #[test]
    fn heralded_ratio_small_eta_limit() {
        let chi = 0.01;
        let d = emission_distribution(chi).unwrap();
        let q = heralded_excitation_distribution(&d, 1e-7).unwrap();
        assert!(close(q.get(2) / q.get(1), 2.0 * chi, 1e-6));
    }

    #[test]
    fn retrieve_examples() {
        let q =
            heralded_excitation_distribution(&emission_distribution(0.1).unwrap(), 1.0).unwrap();
        assert_eq!(retrieve(&q, 1.0).unwrap(), q);
        assert_eq!(retrieve(&q, 0.0).unwrap().probs(), &[1.0, 0.0, 0.0]);
        let out = retrieve(&q, 0.08).unwrap();
        assert!(close(out.get(1), 0.0861090909, 1e-9));
        assert!(close(out.get(2), 0.0005818182, 1e-9));
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_of(&FockDistribution::single()).unwrap(), 0.0);
        let x: f64 = 0.3;
        let poisson =
            FockDistribution::from_weights([1.0 - x - x * x / 2.0, x, x * x / 2.0]).unwrap();
        assert!(close(alpha_of(&poisson).unwrap(), 1.0, 1e-12));
        let q =
            heralded_excitation_distribution(&emission_distribution(0.1).unwrap(), 1.0).unwrap();
        let out = retrieve(&q, 0.08).unwrap();
        assert!(close(alpha_of(&out).unwrap(), 0.1569348064, 1e-9));
        assert!(alpha_of(&FockDistribution::vacuum()).is_err());
    }

    #[test]
    fn stokes_click_matches_retrieved_nonvacuum() {
        let q = FockDistribution::from_weights([0.1, 0.6, 0.3]).unwrap();
        for g in [0.0, 0.08, 0.5, 1.0] {
            let direct = stokes_click_probability(&q, g).unwrap();
            assert!(close(direct, retrieve(&q, g).unwrap().nonvacuum(), 1e-15));
        }
        assert_eq!(
            stokes_click_probability(&FockDistribution::single(), 0.08).unwrap(),
            0.08
        );
    }

    #[test]
    fn source_resolution_modes() {
        let ideal = SourceParams::ideal(2.0e-3, 0.08).resolve().unwrap();
        assert_eq!(ideal.herald_probability, 2.0e-3);
        assert_eq!(ideal.excitation, FockDistribution::single());
        assert_eq!(ideal.alpha().unwrap(), 0.0);

        let micro = SourceParams::microscopic(0.1, 0.5, 0.08).resolve().unwrap();
        assert!(close(micro.herald_probability, 0.051802, 1e-6));

        let solved = SourceParams {
            eta_as: Some(0.5),
            ..SourceParams::ideal(0.0518018018018018, 0.08)
        }
        .resolve()
        .unwrap();
        assert!(close(solved.chi.unwrap(), 0.1, 1e-12));
        assert!(close(solved.herald_probability, 0.0518018018018018, 1e-15));

        let pinned = SourceParams::ideal(2.0e-3, 0.08)
            .with_alpha(0.12)
            .resolve()
            .unwrap();
        assert_eq!(pinned.alpha().unwrap(), 0.12);
    }

    #[test]
    fn source_rejects_unreachable_p_as() {
        let s = SourceParams {
            eta_as: Some(0.1),
            ..SourceParams::ideal(0.9, 0.08)
        };
        assert!(s.resolve().is_err());
        let s = SourceParams {
            p_as: None,
            ..SourceParams::ideal(0.1, 0.08)
        };
        assert!(s.resolve().is_err());
    }

    #[test]
    fn dark_clicks_add_empty_heralds() {
        let s = SourceParams {
            dark_click: 0.01,
            ..SourceParams::ideal(0.02, 0.5)
        }
        .resolve()
        .unwrap();
        assert!(close(s.herald_probability, 1.0 - 0.98 * 0.99, 1e-15));
        assert!(s.excitation.get(0) > 0.0);
        assert!(close(s.excitation.probs().iter().sum::<f64>(), 1.0, 1e-12));
    }
}
