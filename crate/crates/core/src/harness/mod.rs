//! Experiment configuration, execution and trace output.

mod config;
mod run;
mod trace;

pub use config::{parse_config, parse_noise, parse_problem, Problem, RunSpec};
pub use run::{
    build_objective, run_experiment, run_seed, run_single, write_events, ExperimentOutput,
    RunEvent, EVENTS_HEADER,
};
pub use trace::{
    aggregate_runs, read_csv, trace_to_string, write_aggregate_csv, write_csv, AggregatePoint,
    TraceRow, AGGREGATE_HEADER, TRACE_HEADER,
};

/// Environment variable that overrides the seed of every run.
pub const SEED_ENV: &str = "HIDRA_SEED";

/// Applies a seed override; a command-line seed beats the environment,
/// which beats the configuration file.
pub fn override_seeds(
    specs: &mut [RunSpec],
    cli: Option<u64>,
    env: Option<&str>,
) -> crate::Result<()> {
    let seed = match (cli, env) {
        (Some(s), _) => Some(s),
        (None, Some(v)) => Some(v.trim().parse().map_err(|_| {
            crate::Error::Contract(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))
        })?),
        (None, None) => None,
    };
    if let Some(s) = seed {
        for spec in specs {
            spec.seed = s;
        }
    }
    Ok(())
}
