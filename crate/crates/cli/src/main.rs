use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hsync_core::harness::{
    emit_outputs, parse_config, run_scenario, ConfigError, HarnessError, ScenarioRegistry,
};

/// Run a synchronized-source scenario and write CSV tables plus summary.json.
#[derive(Debug, Parser)]
#[command(name = "hsync", version)]
struct Args {
    /// Scenario name; `list` prints the registered scenarios.
    scenario: String,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `trials` from the config.
    #[arg(long)]
    trials: Option<u64>,
    /// Overrides `output_path` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-trial records (protocol_sim only).
    #[arg(long)]
    records: bool,
}

fn run(args: Args, registry: &ScenarioRegistry) -> Result<(), HarnessError> {
    let Some(path) = args.config else {
        registry.lookup(&args.scenario)?;
        return Err(HarnessError::Config(ConfigError::Missing {
            key: "--config".into(),
        }));
    };
    let text = fs::read_to_string(&path).map_err(|source| HarnessError::Io { path, source })?;
    let mut config = parse_config(&text)?;
    if config.scenario != args.scenario {
        return Err(HarnessError::ScenarioMismatch {
            requested: args.scenario,
            configured: config.scenario,
        });
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(trials) = args.trials {
        if trials == 0 {
            return Err(HarnessError::Config(ConfigError::Invalid {
                key: "--trials".into(),
                message: "must be at least 1".into(),
            }));
        }
        config.trials = trials;
    }
    if let Some(out) = args.out {
        config.output_path = out;
    }
    config.sim_records |= args.records;

    let (summary, tables) = run_scenario(&config, registry)?;
    let written = emit_outputs(&summary, &tables, &config.output_path)?;
    print!("{}", summary.to_json());
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let registry = ScenarioRegistry::builtin();
    if args.scenario == "list" {
        for s in registry.iter() {
            println!("{:<14} {}", s.name(), s.description());
        }
        return ExitCode::SUCCESS;
    }
    match run(args, &registry) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
