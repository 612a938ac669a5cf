use serde::Serialize;

use crate::error::{check_positive, DomainError};

/// Transform-limited Gaussian wavepacket of one Stokes photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TemporalMode {
    pub arrival_offset_ns: f64,
    /// FWHM of the two-photon dip in time.
    pub coherence_fwhm_ns: f64,
    pub frequency_offset_mhz: f64,
    pub polarization_angle_deg: f64,
}

impl TemporalMode {
    pub fn new(coherence_fwhm_ns: f64) -> Self {
        Self {
            arrival_offset_ns: 0.0,
            coherence_fwhm_ns,
            frequency_offset_mhz: 0.0,
            polarization_angle_deg: 0.0,
        }
    }

    pub fn delayed(mut self, ns: f64) -> Self {
        self.arrival_offset_ns = ns;
        self
    }

    pub fn detuned(mut self, mhz: f64) -> Self {
        self.frequency_offset_mhz = mhz;
        self
    }

    /// Gaussian width `sigma = fwhm / (4 sqrt(ln 2))`.
    pub fn sigma_ns(&self) -> f64 {
        self.coherence_fwhm_ns / (4.0 * std::f64::consts::LN_2.sqrt())
    }
}

/// Squared overlap `|<m1|m2>|^2` of the spatio-temporal modes.
///
/// `exp(-dt^2 / (4 sigma^2)) * exp(-4 pi^2 dnu^2 sigma^2)` with `dt` in ns and
/// `dnu` in GHz. Polarization is handled separately by [`polarization_overlap`].
pub fn mode_overlap(m1: &TemporalMode, m2: &TemporalMode) -> Result<f64, DomainError> {
    check_positive("coherence_fwhm_ns", m1.coherence_fwhm_ns)?;
    check_positive("coherence_fwhm_ns", m2.coherence_fwhm_ns)?;
    if m1.coherence_fwhm_ns != m2.coherence_fwhm_ns {
        return Err(DomainError::Unsupported(format!(
            "unequal coherence widths {} ns and {} ns",
            m1.coherence_fwhm_ns, m2.coherence_fwhm_ns
        )));
    }
    let sigma = m1.sigma_ns();
    let dt = m1.arrival_offset_ns - m2.arrival_offset_ns;
    let dnu_ghz = (m1.frequency_offset_mhz - m2.frequency_offset_mhz) * 1e-3;
    let two_pi_sigma_nu = 2.0 * std::f64::consts::PI * sigma * dnu_ghz;
    Ok((-(dt * dt) / (4.0 * sigma * sigma) - two_pi_sigma_nu * two_pi_sigma_nu).exp())
}

/// `cos^2` of the relative polarization angle.
pub fn polarization_overlap(m1: &TemporalMode, m2: &TemporalMode) -> f64 {
    (m1.polarization_angle_deg - m2.polarization_angle_deg)
        .to_radians()
        .cos()
        .powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_modes_overlap_fully() {
        let m = TemporalMode::new(25.0);
        assert_eq!(mode_overlap(&m, &m).unwrap(), 1.0);
    }

    #[test]
    fn half_width_points() {
        let m = TemporalMode::new(25.0);
        assert!((m.sigma_ns() - 7.507015055).abs() < 1e-9);
        let o = mode_overlap(&m, &m.delayed(12.5)).unwrap();
        assert!((o - 0.5).abs() < 1e-12);
        let half_mhz = 2.0 * std::f64::consts::LN_2 / (std::f64::consts::PI * 25.0) * 1e3;
        assert!((half_mhz - 17.65).abs() < 0.01);
        let o = mode_overlap(&m, &m.detuned(half_mhz)).unwrap();
        assert!((o - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_widths() {
        let m = TemporalMode::new(25.0);
        assert!(mode_overlap(&m, &TemporalMode::new(20.0)).is_err());
        assert!(mode_overlap(&TemporalMode::new(0.0), &TemporalMode::new(0.0)).is_err());
    }

    #[test]
    fn crossed_polarizations() {
        let h = TemporalMode::new(25.0);
        let v = TemporalMode {
            polarization_angle_deg: 90.0,
            ..h
        };
        assert!(polarization_overlap(&h, &v) < 1e-30);
        assert_eq!(polarization_overlap(&h, &h), 1.0);
    }
}
