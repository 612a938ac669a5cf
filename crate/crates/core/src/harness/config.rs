//! Flat dotted-key configuration documents.
//!
//! ```text
//! # comment
//! scenario = enhancement
//! protocol.n_write_max = 12
//! source_a.p_as = 2.0e-3
//! sweep.tau_c_us = 3, 6, 12, 24
//! ```
//!
//! One `key = value` per line. Units are part of the key name. Lists are
//! comma separated. Every key is optional except `scenario`; defaults are the
//! two-ensemble operating point. Unknown and duplicate keys are rejected.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::interference::{AngleSet, ScanDomain};
use crate::photon_statistics::SourceParams;
use crate::sync_protocol::{DecayModel, ProtocolParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required key `{key}`")]
    Missing { key: String },
    #[error("line {line}: duplicate key `{key}` (first set on line {first_line})")]
    Duplicate {
        key: String,
        line: usize,
        first_line: usize,
    },
    #[error("line {line}: unknown key `{key}`")]
    Unknown { key: String, line: usize },
    #[error("line {line}: `{key}` expects {expected}, found `{found}`")]
    Type {
        key: String,
        line: usize,
        expected: &'static str,
        found: String,
    },
    #[error("`{key}`: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    /// Key the error refers to, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax { .. } => None,
            ConfigError::Missing { key }
            | ConfigError::Duplicate { key, .. }
            | ConfigError::Unknown { key, .. }
            | ConfigError::Type { key, .. }
            | ConfigError::Invalid { key, .. } => Some(key),
        }
    }
}

/// Anti-correlation input of an interference scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AlphaSpec {
    Value(f64),
    /// Use the corresponding source's resolved alpha.
    FromSource,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSettings {
    pub tau_c_us: Vec<f64>,
    pub n_write_max: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomSettings {
    pub domain: ScanDomain,
    pub coherence_fwhm_ns: f64,
    /// Scan range in ns (time) or MHz (frequency).
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub alpha_a: AlphaSpec,
    pub alpha_b: AlphaSpec,
    pub p_i_a: f64,
    pub p_i_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChshMode {
    Analytic,
    Sampled,
}

impl FromStr for ChshMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytic" => Ok(ChshMode::Analytic),
            "sampled" => Ok(ChshMode::Sampled),
            other => Err(format!(
                "unknown mode `{other}` (expected analytic or sampled)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshSettings {
    pub mode: ChshMode,
    pub angles: AngleSet,
    pub n_events: u64,
    pub alpha_a: AlphaSpec,
    pub alpha_b: AlphaSpec,
    pub p_i_a: f64,
    pub p_i_b: f64,
}

/// Fully validated run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: String,
    pub seed: u64,
    pub trials: u64,
    pub protocol: ProtocolParams,
    pub sweep: SweepSettings,
    pub hom: HomSettings,
    pub chsh: ChshSettings,
    /// Write per-trial records in the protocol simulation.
    pub sim_records: bool,
    #[serde(skip)]
    pub output_path: PathBuf,
}

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TRIALS: u64 = 1_000_000;

struct Entry {
    value: String,
    line: usize,
}

struct Entries {
    map: BTreeMap<String, Entry>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map: BTreeMap<String, Entry> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty()
                || !key
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
            {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("invalid key `{key}`"),
                });
            }
            if let Some(first) = map.get(key) {
                return Err(ConfigError::Duplicate {
                    key: key.to_string(),
                    line,
                    first_line: first.line,
                });
            }
            map.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Self { map })
    }

    fn take_raw(&mut self, key: &str) -> Option<Entry> {
        self.map.remove(key)
    }

    fn take<T: FromStr>(
        &mut self,
        key: &str,
        expected: &'static str,
    ) -> Result<Option<T>, ConfigError> {
        match self.take_raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|_| ConfigError::Type {
                    key: key.to_string(),
                    line: e.line,
                    expected,
                    found: e.value,
                }),
        }
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        let v = self.take::<f64>(key, "a number")?;
        if let Some(x) = v {
            if !x.is_finite() {
                return Err(ConfigError::Invalid {
                    key: key.to_string(),
                    message: "must be finite".into(),
                });
            }
        }
        Ok(v)
    }

    fn u64(&mut self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.take::<u64>(key, "a nonnegative integer")
    }

    fn list<T: FromStr>(
        &mut self,
        key: &str,
        expected: &'static str,
    ) -> Result<Option<Vec<T>>, ConfigError> {
        let Some(e) = self.take_raw(key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|item| item.trim().parse::<T>())
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
            .map_err(|_| ConfigError::Type {
                key: key.to_string(),
                line: e.line,
                expected,
                found: e.value,
            })
    }

    fn keyword<T: FromStr<Err = String>>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.take_raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|msg| ConfigError::Invalid {
                    key: key.to_string(),
                    message: format!("line {}: {msg}", e.line),
                }),
        }
    }

    fn alpha(&mut self, key: &str, default: f64) -> Result<AlphaSpec, ConfigError> {
        match self.take_raw(key) {
            None => Ok(AlphaSpec::Value(default)),
            Some(e) if e.value == "source" => Ok(AlphaSpec::FromSource),
            Some(e) => match e.value.parse::<f64>() {
                Ok(x) if x >= 0.0 && x.is_finite() => Ok(AlphaSpec::Value(x)),
                _ => Err(ConfigError::Type {
                    key: key.to_string(),
                    line: e.line,
                    expected: "a nonnegative number or `source`",
                    found: e.value,
                }),
            },
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.map.into_iter().min_by_key(|(_, e)| e.line) {
            None => Ok(()),
            Some((key, e)) => Err(ConfigError::Unknown { key, line: e.line }),
        }
    }
}

fn source(
    entries: &mut Entries,
    prefix: &str,
    default: SourceParams,
) -> Result<SourceParams, ConfigError> {
    let key = |k: &str| format!("{prefix}.{k}");
    let chi = entries.f64(&key("chi"))?;
    let eta_as = entries.f64(&key("eta_as"))?;
    let p_as = entries.f64(&key("p_as"))?;
    let src = SourceParams {
        // a microscopic chi without an explicit p_as replaces the default herald probability
        p_as: if p_as.is_none() && chi.is_some() {
            None
        } else {
            p_as.or(default.p_as)
        },
        chi,
        eta_as,
        gamma0: entries.f64(&key("gamma0"))?.unwrap_or(default.gamma0),
        alpha_override: entries
            .f64(&key("alpha_override"))?
            .or(default.alpha_override),
        dark_click: entries
            .f64(&key("dark_click"))?
            .unwrap_or(default.dark_click),
    };
    src.resolve().map_err(|e| ConfigError::Invalid {
        key: prefix.to_string(),
        message: e.to_string(),
    })?;
    Ok(src)
}

fn unit_interval(key: &str, x: f64) -> Result<f64, ConfigError> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(ConfigError::Invalid {
            key: key.to_string(),
            message: format!("{x} is outside [0, 1]"),
        })
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut e = Entries::parse(text)?;

    let scenario = e
        .take_raw("scenario")
        .ok_or_else(|| ConfigError::Missing {
            key: "scenario".into(),
        })?
        .value;
    if scenario.is_empty() {
        return Err(ConfigError::Missing {
            key: "scenario".into(),
        });
    }
    let seed = e.u64("seed")?.unwrap_or(DEFAULT_SEED);
    let trials = e.u64("trials")?.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(ConfigError::Invalid {
            key: "trials".into(),
            message: "must be at least 1".into(),
        });
    }
    let output_path = e
        .take_raw("output_path")
        .map(|x| PathBuf::from(x.value))
        .unwrap_or_else(|| PathBuf::from("out"));

    let d = ProtocolParams::operating_point();
    let n_write_max = match e.u64("protocol.n_write_max")? {
        None => d.n_write_max,
        Some(n) => u32::try_from(n).map_err(|_| ConfigError::Invalid {
            key: "protocol.n_write_max".into(),
            message: "too large".into(),
        })?,
    };
    let protocol = ProtocolParams {
        n_write_max,
        dt_write_ns: e.f64("protocol.dt_write_ns")?.unwrap_or(d.dt_write_ns),
        dt_read_ns: e.f64("protocol.dt_read_ns")?.unwrap_or(d.dt_read_ns),
        tau_c_us: e.f64("protocol.tau_c_us")?.unwrap_or(d.tau_c_us),
        decay_model: e
            .keyword::<DecayModel>("protocol.decay_model")?
            .unwrap_or(d.decay_model),
        latency_ns: e.f64("protocol.latency_ns")?.unwrap_or(d.latency_ns),
        source_a: source(&mut e, "source_a", d.source_a.clone())?,
        source_b: source(&mut e, "source_b", d.source_b.clone())?,
    };
    protocol.validate().map_err(|err| ConfigError::Invalid {
        key: "protocol".into(),
        message: err.to_string(),
    })?;

    let sweep = SweepSettings {
        tau_c_us: e
            .list::<f64>("sweep.tau_c_us", "a comma-separated list of numbers")?
            .unwrap_or_else(|| vec![protocol.tau_c_us]),
        n_write_max: e
            .list::<u32>("sweep.n_write_max", "a comma-separated list of integers")?
            .unwrap_or_else(|| (1..=protocol.n_write_max).collect()),
    };
    if sweep.tau_c_us.iter().any(|t| t.is_nan() || *t <= 0.0) || sweep.n_write_max.contains(&0) {
        return Err(ConfigError::Invalid {
            key: "sweep".into(),
            message: "lifetimes must be positive and attempt budgets at least 1".into(),
        });
    }

    let domain = e
        .keyword::<ScanDomain>("hom.domain")?
        .unwrap_or(ScanDomain::Time);
    // detuning scan range of the frequency-domain measurement: -30 .. 30 MHz
    let (dmin, dmax, dpoints) = match domain {
        ScanDomain::Time => (-60.0, 60.0, 121),
        ScanDomain::Frequency => (-30.0, 30.0, 61),
    };
    let hom = HomSettings {
        domain,
        coherence_fwhm_ns: e.f64("hom.coherence_fwhm_ns")?.unwrap_or(25.0),
        min: e.f64("hom.min")?.unwrap_or(dmin),
        max: e.f64("hom.max")?.unwrap_or(dmax),
        points: e.u64("hom.points")?.map(|p| p as usize).unwrap_or(dpoints),
        alpha_a: e.alpha("hom.alpha_a", 0.12)?,
        alpha_b: e.alpha("hom.alpha_b", 0.17)?,
        p_i_a: unit_interval("hom.p_i_a", e.f64("hom.p_i_a")?.unwrap_or(1.0))?,
        p_i_b: unit_interval("hom.p_i_b", e.f64("hom.p_i_b")?.unwrap_or(1.0))?,
    };
    if hom.coherence_fwhm_ns.is_nan()
        || hom.coherence_fwhm_ns <= 0.0
        || hom.points == 0
        || hom.min > hom.max
    {
        return Err(ConfigError::Invalid {
            key: "hom".into(),
            message: "need coherence_fwhm_ns > 0, points >= 1 and min <= max".into(),
        });
    }

    let angles = match e.list::<f64>("chsh.angles_deg", "four comma-separated angles")? {
        None => AngleSet::optimal(),
        Some(v) if v.len() == 4 => AngleSet {
            theta1: v[0],
            theta1p: v[1],
            theta2: v[2],
            theta2p: v[3],
        },
        Some(v) => {
            return Err(ConfigError::Invalid {
                key: "chsh.angles_deg".into(),
                message: format!("expected 4 angles, found {}", v.len()),
            })
        }
    };
    let chsh = ChshSettings {
        mode: e
            .keyword::<ChshMode>("chsh.mode")?
            .unwrap_or(ChshMode::Analytic),
        angles,
        n_events: e.u64("chsh.n_events")?.unwrap_or(1_000_000),
        alpha_a: e.alpha("chsh.alpha_a", 0.12)?,
        alpha_b: e.alpha("chsh.alpha_b", 0.17)?,
        p_i_a: unit_interval("chsh.p_i_a", e.f64("chsh.p_i_a")?.unwrap_or(1.0))?,
        p_i_b: unit_interval("chsh.p_i_b", e.f64("chsh.p_i_b")?.unwrap_or(1.0))?,
    };
    if chsh.n_events == 0 {
        return Err(ConfigError::Invalid {
            key: "chsh.n_events".into(),
            message: "must be at least 1".into(),
        });
    }

    let sim_records = e
        .take::<bool>("sim.records", "true or false")?
        .unwrap_or(false);

    e.finish()?;
    Ok(RunConfig {
        scenario,
        seed,
        trials,
        protocol,
        sweep,
        hom,
        chsh,
        sim_records,
        output_path,
    })
}
