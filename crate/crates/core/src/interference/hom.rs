use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::mode::{mode_overlap, TemporalMode};
use crate::error::{check_nonneg, check_positive, check_unit, DomainError};

/// Four-fold coincidence levels of a Hong-Ou-Mandel measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomResult {
    /// Coincidence probability for fully distinguishable photons.
    pub c_plat: f64,
    /// Coincidence probability at perfect overlap.
    pub c_dip: f64,
    pub visibility: f64,
    /// Coincidence probability at the requested overlap.
    pub coincidence: f64,
}

/// Two-photon coincidence behind the beam splitter for sources with
/// anti-correlation `alpha_k` and one-photon probability `p_i_k`.
///
/// With `P_II,k = alpha_k p_i_k^2 / 2`, the plateau is
/// `p_i1 p_i2 / 2 + (P_II,1 + P_II,2) / 2`; overlap removes up to the
/// `p_i1 p_i2 / 2` single-photon pair term.
pub fn hom_coincidence(
    alpha1: f64,
    alpha2: f64,
    p_i1: f64,
    p_i2: f64,
    overlap: f64,
) -> Result<HomResult, DomainError> {
    check_nonneg("alpha1", alpha1)?;
    check_nonneg("alpha2", alpha2)?;
    check_unit("p_i1", p_i1)?;
    check_unit("p_i2", p_i2)?;
    check_unit("overlap", overlap)?;
    let pair = p_i1 * p_i2 / 2.0;
    let p_ii1 = alpha1 * p_i1 * p_i1 / 2.0;
    let p_ii2 = alpha2 * p_i2 * p_i2 / 2.0;
    let c_plat = pair + (p_ii1 + p_ii2) / 2.0;
    if c_plat <= 0.0 {
        return Err(DomainError::Undefined("plateau coincidence is zero"));
    }
    let c_dip = c_plat - pair;
    Ok(HomResult {
        c_plat,
        c_dip,
        visibility: (c_plat - c_dip) / c_plat,
        coincidence: c_plat - overlap * pair,
    })
}

/// Scan variable of a dip measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanDomain {
    /// Relative delay of the read pulses, ns.
    Time,
    /// Relative detuning of the read lasers, MHz.
    Frequency,
}

impl ScanDomain {
    pub fn name(self) -> &'static str {
        match self {
            ScanDomain::Time => "time",
            ScanDomain::Frequency => "frequency",
        }
    }

    /// CSV column header of the abscissa.
    pub fn column(self) -> &'static str {
        match self {
            ScanDomain::Time => "delay_ns",
            ScanDomain::Frequency => "detuning_mhz",
        }
    }

    pub fn overlap_at(self, x: f64, coherence_fwhm_ns: f64) -> Result<f64, DomainError> {
        let m = TemporalMode::new(coherence_fwhm_ns);
        let shifted = match self {
            ScanDomain::Time => m.delayed(x),
            ScanDomain::Frequency => m.detuned(x),
        };
        mode_overlap(&m, &shifted)
    }
}

impl fmt::Display for ScanDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScanDomain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "time" => Ok(ScanDomain::Time),
            "frequency" => Ok(ScanDomain::Frequency),
            other => Err(format!(
                "unknown scan domain `{other}` (expected time or frequency)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomScanInput {
    pub alpha1: f64,
    pub alpha2: f64,
    pub p_i1: f64,
    pub p_i2: f64,
    pub coherence_fwhm_ns: f64,
    pub domain: ScanDomain,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomScan {
    pub domain: ScanDomain,
    /// `(abscissa, coincidence)` per grid point.
    pub points: Vec<(f64, f64)>,
    pub levels: HomResult,
    /// Full width at half depth of the analytic dip, in the domain's unit.
    pub fwhm: f64,
}

/// Evaluates the dip over `grid` and measures its width on the analytic curve.
pub fn hom_scan(input: &HomScanInput) -> Result<HomScan, DomainError> {
    if input.grid.is_empty() {
        return Err(DomainError::Unsupported("empty scan grid".into()));
    }
    if !input.grid.is_sorted() || input.grid.iter().any(|x| x.is_nan()) {
        return Err(DomainError::Unsupported("scan grid must be sorted".into()));
    }
    let levels = hom_coincidence(input.alpha1, input.alpha2, input.p_i1, input.p_i2, 1.0)?;
    let points = input
        .grid
        .iter()
        .map(|&x| {
            let o = input.domain.overlap_at(x, input.coherence_fwhm_ns)?;
            let c = hom_coincidence(input.alpha1, input.alpha2, input.p_i1, input.p_i2, o)?;
            Ok((x, c.coincidence))
        })
        .collect::<Result<Vec<_>, DomainError>>()?;
    let fwhm = half_depth_width(input.domain, input.coherence_fwhm_ns)?;
    Ok(HomScan {
        domain: input.domain,
        points,
        levels,
        fwhm,
    })
}

/// Width between the half-depth crossings, from inverting the overlap.
///
/// In time the dip width is the coherence FWHM itself. In frequency,
/// `(2 pi sigma dnu)^2 = ln 2` gives `4 ln 2 / (pi * fwhm_ns)` GHz.
fn half_depth_width(domain: ScanDomain, coherence_fwhm_ns: f64) -> Result<f64, DomainError> {
    check_positive("coherence_fwhm_ns", coherence_fwhm_ns)?;
    Ok(match domain {
        ScanDomain::Time => coherence_fwhm_ns,
        ScanDomain::Frequency => {
            4.0 * std::f64::consts::LN_2 / (std::f64::consts::PI * coherence_fwhm_ns) * 1e3
        }
    })
}
