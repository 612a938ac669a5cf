use super::{ProtocolParams, ResolvedProtocol};
use crate::error::DomainError;

/// Four-fold coincidence probability when both nodes write and read once per
/// trial with no memory hold beyond `dt_read`.
pub fn p4c_no_feedback(params: &ProtocolParams) -> Result<f64, DomainError> {
    let r = params.resolve()?;
    Ok(no_feedback(&r))
}

fn no_feedback(r: &ResolvedProtocol) -> f64 {
    let [a, b] = &r.sources;
    a.herald_probability
        * r.stokes_success(0, r.dt_read_ns)
        * b.herald_probability
        * r.stokes_success(1, r.dt_read_ns)
}

/// Four-fold coincidence probability per trial with feedback.
///
/// Events are partitioned by which node heralds first. Node `first` heralds
/// at attempt `i`, the other at `j >= i` (`j > i` for the second ordering so
/// simultaneous heralds are counted once). The earlier node holds for
/// `(j - i) * dt_write` longer than the later one.
pub fn p4c_feedback_closed_form(params: &ProtocolParams) -> Result<f64, DomainError> {
    let r = params.resolve()?;
    Ok(feedback(&r))
}

fn ordered_sum(r: &ResolvedProtocol, first: usize, include_tie: bool) -> f64 {
    let second = 1 - first;
    let n = r.n_write_max as usize;
    let p1 = r.sources[first].herald_probability;
    let p2 = r.sources[second].herald_probability;
    let base = r.base_hold_ns();
    let later = r.stokes_success(second, base);
    // earlier-node success indexed by the attempt gap
    let earlier: Vec<f64> = (0..n)
        .map(|gap| r.stokes_success(first, gap as f64 * r.dt_write_ns + base))
        .collect();

    let mut total = 0.0;
    let mut w1 = p1;
    for i in 0..n {
        let start = if include_tie { i } else { i + 1 };
        let mut w2 = p2 * (1.0 - p2).powi(start as i32);
        let mut inner = 0.0;
        for j in start..n {
            inner += w2 * earlier[j - i];
            w2 *= 1.0 - p2;
        }
        total += w1 * inner;
        w1 *= 1.0 - p1;
    }
    total * later
}

fn feedback(r: &ResolvedProtocol) -> f64 {
    ordered_sum(r, 0, true) + ordered_sum(r, 1, false)
}

/// Ratio of the feedback to the no-feedback coincidence probability.
pub fn enhancement_factor(params: &ProtocolParams) -> Result<f64, DomainError> {
    let r = params.resolve()?;
    let denom = no_feedback(&r);
    if denom <= 0.0 {
        return Err(DomainError::Undefined(
            "no-feedback coincidence probability is zero",
        ));
    }
    Ok(feedback(&r) / denom)
}
