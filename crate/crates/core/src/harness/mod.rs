//! Config-driven runs: parse a document, dispatch to a named scenario,
//! write CSV tables and a JSON summary.

pub mod config;
pub mod output;
pub mod scenario;

use std::path::PathBuf;

use thiserror::Error;

use crate::error::DomainError;

pub use config::{parse_config, AlphaSpec, ChshMode, ConfigError, RunConfig};
pub use output::{config_hash, emit_outputs, Cell, DataTable, RunSummary};
pub use scenario::{Scenario, ScenarioOutput, ScenarioRegistry};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("unknown scenario `{name}` (known: {known})")]
    UnknownScenario { name: String, known: String },
    #[error("scenario `{requested}` does not match config scenario `{configured}`")]
    ScenarioMismatch {
        requested: String,
        configured: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{scenario}: {source}")]
    Domain {
        scenario: String,
        #[source]
        source: DomainError,
    },
}

impl HarnessError {
    /// Process exit status: 2 for bad input, 3 for I/O, 4 for domain errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_)
            | HarnessError::UnknownScenario { .. }
            | HarnessError::ScenarioMismatch { .. } => 2,
            HarnessError::Io { .. } => 3,
            HarnessError::Domain { .. } => 4,
        }
    }
}

/// Runs the scenario named in `config`.
pub fn run_scenario(
    config: &RunConfig,
    registry: &ScenarioRegistry,
) -> Result<(RunSummary, Vec<DataTable>), HarnessError> {
    let scenario = registry.lookup(&config.scenario)?;
    let out = scenario
        .run(config)
        .map_err(|source| HarnessError::Domain {
            scenario: config.scenario.clone(),
            source,
        })?;
    let summary = RunSummary {
        scenario: config.scenario.clone(),
        metrics: out.metrics,
        config_hash: config_hash(config),
        seed: config.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok((summary, out.tables))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let registry = ScenarioRegistry::builtin();
        let cfg = parse_config("scenario = nope\n").unwrap();
        assert_eq!(run_scenario(&cfg, &registry).unwrap_err().exit_code(), 2);

        let cfg = parse_config("scenario = enhancement\nsource_a.p_as = 0\n").unwrap();
        assert_eq!(run_scenario(&cfg, &registry).unwrap_err().exit_code(), 4);

        let err: HarnessError = parse_config("seed = 1\n").unwrap_err().into();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn summary_carries_seed_and_hash() {
        let cfg = parse_config("scenario = chsh\nseed = 9\n").unwrap();
        let (summary, tables) = run_scenario(&cfg, &ScenarioRegistry::builtin()).unwrap();
        assert_eq!(summary.seed, 9);
        assert_eq!(summary.config_hash.len(), 64);
        assert_eq!(tables[0].name, "chsh_correlations");
        assert!((summary.metric("S").unwrap() - 2.2911).abs() < 5e-4);
    }
}
