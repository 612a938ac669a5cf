//! Beam-splitter measurement stage: wavepacket overlap, Hong-Ou-Mandel dips
//! and CHSH tests on the post-selected polarization state.

mod chsh;
mod hom;
mod mode;

pub use chsh::{
    alpha_violation_threshold, chsh_for_state, chsh_from_correlations, correlation,
    effective_state, predicted_S, sample_chsh_experiment, AngleSet, ChshResult,
    EffectiveTwoPhotonState, SampledChsh, SettingCounts, CLASSICAL_BOUND, TSIRELSON_BOUND,
};
pub use hom::{hom_coincidence, hom_scan, HomResult, HomScan, HomScanInput, ScanDomain};
pub use mode::{mode_overlap, polarization_overlap, TemporalMode};
