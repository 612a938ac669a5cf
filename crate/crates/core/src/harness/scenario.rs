//! Scenarios behind a common trait, registered by name.

use std::collections::BTreeMap;

use serde_json::Value;

use super::config::{AlphaSpec, ChshMode, RunConfig};
use super::output::DataTable;
use super::HarnessError;
use crate::error::DomainError;
use crate::interference::{
    alpha_violation_threshold, chsh_for_state, effective_state, hom_scan, predicted_S,
    sample_chsh_experiment, HomScanInput, ScanDomain,
};
use crate::sync_protocol::{
    enhancement_factor, p4c_feedback_closed_form, p4c_no_feedback, simulate_campaign,
    simulate_trials, ProtocolParams,
};

/// Metrics and tables produced by one scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioOutput {
    pub metrics: BTreeMap<String, Value>,
    pub tables: Vec<DataTable>,
}

impl ScenarioOutput {
    fn metric(&mut self, key: &str, value: impl Into<Value>) {
        self.metrics.insert(key.to_string(), value.into());
    }
}

pub trait Scenario: Send + Sync {
    /// Registry key, also the CLI subcommand and the config `scenario` value.
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, config: &RunConfig) -> Result<ScenarioOutput, DomainError>;
}

#[derive(Default)]
pub struct ScenarioRegistry {
    scenarios: BTreeMap<&'static str, Box<dyn Scenario>>,
}

impl ScenarioRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the four built-in scenarios.
    pub fn builtin() -> Self {
        let mut r = Self::new();
        r.register(Box::new(Enhancement));
        r.register(Box::new(HomScanScenario));
        r.register(Box::new(Chsh));
        r.register(Box::new(ProtocolSim));
        r
    }

    /// Adds a scenario, replacing any previous one with the same name.
    pub fn register(&mut self, scenario: Box<dyn Scenario>) -> Option<Box<dyn Scenario>> {
        self.scenarios.insert(scenario.name(), scenario)
    }

    pub fn get(&self, name: &str) -> Option<&dyn Scenario> {
        self.scenarios.get(name).map(|s| s.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.scenarios.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Scenario> {
        self.scenarios.values().map(|s| s.as_ref())
    }

    pub fn lookup(&self, name: &str) -> Result<&dyn Scenario, HarnessError> {
        self.get(name).ok_or_else(|| HarnessError::UnknownScenario {
            name: name.to_string(),
            known: self.names().collect::<Vec<_>>().join(", "),
        })
    }
}

fn resolve_alpha(
    spec: AlphaSpec,
    params: &ProtocolParams,
    node: usize,
) -> Result<f64, DomainError> {
    match spec {
        AlphaSpec::Value(a) => Ok(a),
        AlphaSpec::FromSource => {
            let src = if node == 0 {
                &params.source_a
            } else {
                &params.source_b
            };
            src.resolve()?.alpha()
        }
    }
}

/// Closed-form coincidence enhancement plus a sweep over lifetime and attempt budget.
pub struct Enhancement;

impl Scenario for Enhancement {
    fn name(&self) -> &'static str {
        "enhancement"
    }

    fn description(&self) -> &'static str {
        "four-fold coincidence enhancement from memory and feedback"
    }

    fn run(&self, config: &RunConfig) -> Result<ScenarioOutput, DomainError> {
        let p = &config.protocol;
        let mut out = ScenarioOutput::default();
        out.metric("enhancement", enhancement_factor(p)?);
        out.metric("p4c_closed_form", p4c_feedback_closed_form(p)?);
        out.metric("p4c_no_feedback", p4c_no_feedback(p)?);
        out.metric("n_squared", (p.n_write_max as f64).powi(2));

        let mut table = DataTable::new(
            "enhancement_sweep",
            &["tau_c_us", "n_write_max", "enhancement"],
        );
        for &tau_c_us in &config.sweep.tau_c_us {
            for &n_write_max in &config.sweep.n_write_max {
                let swept = ProtocolParams {
                    tau_c_us,
                    n_write_max,
                    ..p.clone()
                };
                table.push(vec![
                    tau_c_us.into(),
                    n_write_max.into(),
                    enhancement_factor(&swept)?.into(),
                ]);
            }
        }
        out.tables.push(table);
        Ok(out)
    }
}

/// Hong-Ou-Mandel dip in the time or frequency domain.
pub struct HomScanScenario;

impl Scenario for HomScanScenario {
    fn name(&self) -> &'static str {
        "hom_scan"
    }

    fn description(&self) -> &'static str {
        "Hong-Ou-Mandel dip versus delay or detuning"
    }

    fn run(&self, config: &RunConfig) -> Result<ScenarioOutput, DomainError> {
        let h = &config.hom;
        let grid: Vec<f64> = if h.points == 1 {
            vec![h.min]
        } else {
            let step = (h.max - h.min) / (h.points - 1) as f64;
            (0..h.points).map(|i| h.min + step * i as f64).collect()
        };
        let input = |domain: ScanDomain, grid: Vec<f64>| -> Result<HomScanInput, DomainError> {
            Ok(HomScanInput {
                alpha1: resolve_alpha(h.alpha_a, &config.protocol, 0)?,
                alpha2: resolve_alpha(h.alpha_b, &config.protocol, 1)?,
                p_i1: h.p_i_a,
                p_i2: h.p_i_b,
                coherence_fwhm_ns: h.coherence_fwhm_ns,
                domain,
                grid,
            })
        };
        let scan = hom_scan(&input(h.domain, grid)?)?;
        let time = hom_scan(&input(ScanDomain::Time, vec![0.0])?)?;
        let freq = hom_scan(&input(ScanDomain::Frequency, vec![0.0])?)?;

        let mut out = ScenarioOutput::default();
        out.metric("domain", h.domain.name());
        out.metric("visibility", scan.levels.visibility);
        out.metric("c_plat", scan.levels.c_plat);
        out.metric("c_dip", scan.levels.c_dip);
        out.metric("fwhm", scan.fwhm);
        out.metric("dip_fwhm_ns", time.fwhm);
        out.metric("dip_fwhm_mhz", freq.fwhm);
        out.metric("time_bandwidth_product", time.fwhm * freq.fwhm * 1e-3);

        let mut table = DataTable::new("hom_scan", &[h.domain.column(), "coincidence", "plateau"]);
        for (x, c) in &scan.points {
            table.push(vec![(*x).into(), (*c).into(), scan.levels.c_plat.into()]);
        }
        out.tables.push(table);
        Ok(out)
    }
}

/// CHSH parameter of the post-selected state, analytic or sampled.
pub struct Chsh;

impl Scenario for Chsh {
    fn name(&self) -> &'static str {
        "chsh"
    }

    fn description(&self) -> &'static str {
        "CHSH Bell parameter of the post-selected two-photon state"
    }

    fn run(&self, config: &RunConfig) -> Result<ScenarioOutput, DomainError> {
        let c = &config.chsh;
        let alpha_a = resolve_alpha(c.alpha_a, &config.protocol, 0)?;
        let alpha_b = resolve_alpha(c.alpha_b, &config.protocol, 1)?;
        let state = effective_state(alpha_a, alpha_b, c.p_i_a, c.p_i_b)?;
        let alpha_bar = 0.5 * (alpha_a + alpha_b);
        let analytic = chsh_for_state(&state, &c.angles);

        let mut out = ScenarioOutput::default();
        out.metric("alpha_bar", alpha_bar);
        out.metric("predicted_S", predicted_S(alpha_bar)?);
        out.metric("alpha_threshold", alpha_violation_threshold());
        out.metric("w_singlet", state.w_singlet);
        out.metric("S_analytic", analytic.s);

        match c.mode {
            ChshMode::Analytic => {
                out.metric("mode", "analytic");
                out.metric("S", analytic.s);
                let mut table =
                    DataTable::new("chsh_correlations", &["theta1_deg", "theta2_deg", "e"]);
                for ((a, b), e) in c.angles.settings().iter().zip(analytic.e) {
                    table.push(vec![(*a).into(), (*b).into(), e.into()]);
                }
                out.tables.push(table);
            }
            ChshMode::Sampled => {
                let sampled = sample_chsh_experiment(&state, &c.angles, c.n_events, config.seed)?;
                out.metric("mode", "sampled");
                out.metric("S", sampled.result.s);
                if let Some(sd) = sampled.result.sigma_s {
                    out.metric("sigma_s", sd);
                }
                if let Some(n) = sampled.result.n_sigma {
                    out.metric("n_sigma", n);
                }
                out.metric("n_events_per_setting", c.n_events);
                let mut table = DataTable::new(
                    "chsh_counts",
                    &[
                        "theta1_deg",
                        "theta2_deg",
                        "n_pp",
                        "n_pm",
                        "n_mp",
                        "n_mm",
                        "e",
                        "sigma_e",
                    ],
                );
                for s in sampled.settings {
                    table.push(vec![
                        s.theta1.into(),
                        s.theta2.into(),
                        s.n_pp.into(),
                        s.n_pm.into(),
                        s.n_mp.into(),
                        s.n_mm.into(),
                        s.e.into(),
                        s.sigma_e.into(),
                    ]);
                }
                out.tables.push(table);
            }
        }
        Ok(out)
    }
}

/// Monte Carlo campaign of the event-driven protocol against the closed form.
pub struct ProtocolSim;

impl Scenario for ProtocolSim {
    fn name(&self) -> &'static str {
        "protocol_sim"
    }

    fn description(&self) -> &'static str {
        "event-driven protocol Monte Carlo versus the closed form"
    }

    fn run(&self, config: &RunConfig) -> Result<ScenarioOutput, DomainError> {
        let p = &config.protocol;
        let stats = simulate_campaign(p, config.trials, config.seed)?;
        let closed = p4c_feedback_closed_form(p)?;
        let null_se = (closed * (1.0 - closed) / stats.trials as f64).sqrt();

        let mut out = ScenarioOutput::default();
        out.metric("trials", stats.trials);
        out.metric("four_fold_count", stats.four_fold_count);
        out.metric("p4c_hat", stats.p4c_hat);
        out.metric("std_err", stats.std_err);
        out.metric("p4c_closed_form", closed);
        if null_se > 0.0 {
            out.metric("z_score", (stats.p4c_hat - closed) / null_se);
        }
        if let Ok(nf) = p4c_no_feedback(p) {
            if nf > 0.0 {
                out.metric("enhancement_hat", stats.p4c_hat / nf);
            }
        }

        if config.sim_records {
            let mut table = DataTable::new(
                "protocol_trials",
                &[
                    "trial",
                    "herald_a",
                    "herald_b",
                    "hold_a_ns",
                    "hold_b_ns",
                    "four_fold",
                ],
            );
            for (k, t) in simulate_trials(p, config.trials, config.seed)?
                .into_iter()
                .enumerate()
            {
                table.push(vec![
                    (k as u64).into(),
                    t.herald_a.into(),
                    t.herald_b.into(),
                    t.hold_time_a_ns.into(),
                    t.hold_time_b_ns.into(),
                    t.four_fold.into(),
                ]);
            }
            out.tables.push(table);
        }
        Ok(out)
    }
}
