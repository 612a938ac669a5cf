//! Reference implementations used only by tests. Written directly from the
//! model definitions, without going through the library's internals.

#![allow(dead_code)]

use hsync_core::interference::SettingCounts;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

/// Per-node parameters for the brute-force coincidence sum.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub p_as: f64,
    pub gamma0: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Timing {
    pub n: u32,
    pub dt_write_ns: f64,
    pub dt_read_ns: f64,
    pub tau_c_us: f64,
    pub exponential: bool,
}

pub fn gamma(node: Node, hold_ns: f64, t: Timing) -> f64 {
    let tau = t.tau_c_us * 1e3;
    let f = if t.exponential {
        (-hold_ns / tau).exp()
    } else {
        (-(hold_ns * hold_ns) / (2.0 * tau * tau)).exp()
    };
    node.gamma0 * f
}

/// Full `N x N` enumeration of herald attempt pairs with ideal heralding.
pub fn p4c_brute_force(a: Node, b: Node, t: Timing) -> f64 {
    let mut total = 0.0;
    for i in 0..t.n {
        for j in 0..t.n {
            let pa = a.p_as * (1.0 - a.p_as).powi(i as i32);
            let pb = b.p_as * (1.0 - b.p_as).powi(j as i32);
            let later = i.max(j);
            let hold_a = (later - i) as f64 * t.dt_write_ns + t.dt_read_ns;
            let hold_b = (later - j) as f64 * t.dt_write_ns + t.dt_read_ns;
            total += pa * pb * gamma(a, hold_a, t) * gamma(b, hold_b, t);
        }
    }
    total
}

pub fn p4c_single_shot(a: Node, b: Node, t: Timing) -> f64 {
    a.p_as * gamma(a, t.dt_read_ns, t) * b.p_as * gamma(b, t.dt_read_ns, t)
}

fn s_value(e: [f64; 4]) -> f64 {
    (e[0] - e[1] - e[2] - e[3]).abs()
}

fn resample_e<R: Rng>(c: &SettingCounts, rng: &mut R) -> f64 {
    // multinomial as a chain of conditional binomials
    let n = c.total();
    let probs = [c.n_pp, c.n_pm, c.n_mp, c.n_mm].map(|k| k as f64 / n as f64);
    let mut left = n;
    let mut mass = 1.0;
    let mut draw = [0u64; 4];
    for k in 0..3 {
        let p = if mass > 0.0 {
            (probs[k] / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        draw[k] = Binomial::new(left, p).unwrap().sample(rng);
        left -= draw[k];
        mass -= probs[k];
    }
    draw[3] = left;
    let same = (draw[0] + draw[3]) as f64;
    let diff = (draw[1] + draw[2]) as f64;
    (same - diff) / n as f64
}

/// Bootstrap standard deviation of S from the observed counts.
pub fn bootstrap_sigma_s<R: Rng>(
    settings: &[SettingCounts; 4],
    resamples: usize,
    rng: &mut R,
) -> f64 {
    let values: Vec<f64> = (0..resamples)
        .map(|_| s_value([0, 1, 2, 3].map(|k| resample_e(&settings[k], rng))))
        .collect();
    let mean = values.iter().sum::<f64>() / resamples as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    var.sqrt()
}
