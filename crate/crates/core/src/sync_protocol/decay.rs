use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{check_nonneg, check_positive, DomainError};

/// Functional form of the memory's retrieval-efficiency decay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum DecayModel {
    /// `gamma0 * exp(-t^2 / (2 tau_c^2))`
    #[default]
    GaussianHalf,
    /// `gamma0 * exp(-t / tau_c)`
    Exponential,
}

impl DecayModel {
    pub fn name(self) -> &'static str {
        match self {
            DecayModel::GaussianHalf => "gaussian_half",
            DecayModel::Exponential => "exponential",
        }
    }

    /// Survival factor for hold time and lifetime in the same unit.
    #[inline]
    pub(crate) fn factor(self, t: f64, tau: f64) -> f64 {
        let x = t / tau;
        match self {
            DecayModel::GaussianHalf => (-0.5 * x * x).exp(),
            DecayModel::Exponential => (-x).exp(),
        }
    }
}

impl fmt::Display for DecayModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecayModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian_half" => Ok(DecayModel::GaussianHalf),
            "exponential" => Ok(DecayModel::Exponential),
            other => Err(format!(
                "unknown decay model `{other}` (expected gaussian_half or exponential)"
            )),
        }
    }
}

/// Retrieval efficiency after holding the excitation for `hold_time_ns`.
pub fn memory_retrieval_efficiency(
    gamma0: f64,
    hold_time_ns: f64,
    model: DecayModel,
    tau_c_us: f64,
) -> Result<f64, DomainError> {
    check_nonneg("hold_time_ns", hold_time_ns)?;
    check_positive("tau_c_us", tau_c_us)?;
    crate::error::check_unit("gamma0", gamma0)?;
    Ok(gamma0 * model.factor(hold_time_ns, tau_c_us * 1e3))
}
