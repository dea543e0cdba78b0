use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use hidra_core::harness::{
    aggregate_runs, override_seeds, parse_config, run_experiment, write_aggregate_csv, write_csv,
    write_events, RunSpec, SEED_ENV,
};

#[derive(Parser)]
#[command(
    name = "hidra",
    version,
    about = "Evolution strategies for high-dimensional noisy problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of a configuration and write CSV traces.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Cells run in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Base seed for every cell; overrides the config and HIDRA_SEED.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the cells a configuration expands to.
    List { config: PathBuf },
}

fn load(path: &Path, seed: Option<u64>) -> Result<Vec<RunSpec>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut specs = parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let env = std::env::var(SEED_ENV).ok();
    override_seeds(&mut specs, seed, env.as_deref()).map_err(|e| e.to_string())?;
    Ok(specs)
}

fn run_cell(idx: usize, spec: &RunSpec, out: &Path) -> Result<bool, String> {
    let name = format!("{idx:03}_{}", spec.label());
    let result = run_experiment(spec).map_err(|e| format!("{name}: {e}"))?;
    let write = |suffix: &str| -> Result<BufWriter<File>, String> {
        let p = out.join(format!("{name}.{suffix}.csv"));
        File::create(&p)
            .map(BufWriter::new)
            .map_err(|e| format!("{}: {e}", p.display()))
    };
    let err = |e: hidra_core::Error| format!("{name}: {e}");
    write_csv(write("trace")?, &result.rows).map_err(err)?;
    write_events(write("events")?, &result.events).map_err(err)?;
    let agg = aggregate_runs(&result.rows, None).map_err(err)?;
    write_aggregate_csv(write("aggregate")?, &agg).map_err(err)?;
    let ok = result.completed();
    eprintln!(
        "{name}: {} runs, {} rows{}",
        spec.runs,
        result.rows.len(),
        if ok { "" } else { ", some runs failed" }
    );
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List { config } => {
            let specs = match load(&config, None) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            for (i, s) in specs.iter().enumerate() {
                println!(
                    "{i:03} {} lambda={} budget={} runs={} seed={}",
                    s.label(),
                    s.lambda(),
                    s.budget,
                    s.runs,
                    s.seed
                );
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            out,
            jobs,
            seed,
        } => {
            let specs = match load(&config, seed) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Err(e) = fs::create_dir_all(&out) {
                eprintln!("error: {}: {e}", out.display());
                return ExitCode::from(2);
            }
            let pool = match rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
            {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let results: Vec<Result<bool, String>> = pool.install(|| {
                specs
                    .par_iter()
                    .enumerate()
                    .map(|(i, s)| run_cell(i, s, &out))
                    .collect()
            });
            let mut all_ok = true;
            for r in results {
                match r {
                    Ok(ok) => all_ok &= ok,
                    Err(e) => {
                        eprintln!("error: {e}");
                        all_ok = false;
                    }
                }
            }
            if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
