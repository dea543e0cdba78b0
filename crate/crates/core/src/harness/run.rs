//! Runs one cell of the experiment matrix.

use nalgebra::DVector;

use super::config::{Problem, RunSpec};
use super::trace::TraceRow;
use crate::benchmarks::{Ellipsoid, NoiseModel, Rosenbrock};
use crate::control::{PointMassObjective, PointMassTask};
use crate::error::{Error, Result};
use crate::objective::{evaluate_counted, Budget, Objective};
use crate::restarts::{restart_params, should_stop, StopCriteria, StopReason};
use crate::rng::{spawn_stream, RngStream};
use crate::strategy::{Strategy, StrategyParams, SIGMA_FLOOR};
use crate::uncertainty::{uh_generation, UncertaintyState};

// leaves of the per-generation derivation path
const SAMPLE: u64 = 0;
const EVAL: u64 = 1;
const INIT: u64 = u64::MAX;

/// A restart or termination inside a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunEvent {
    pub run_id: u32,
    pub restart_index: u32,
    pub generation: u64,
    pub evals_used: u64,
    pub reason: StopReason,
    /// Set for [`StopReason::Error`].
    pub message: Option<String>,
    /// Whether a new restart follows.
    pub restarted: bool,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<TraceRow>,
    pub events: Vec<RunEvent>,
}

impl ExperimentOutput {
    /// True when no run ended in an error.
    pub fn completed(&self) -> bool {
        self.events.iter().all(|e| e.reason != StopReason::Error)
    }
}

pub fn build_objective(spec: &RunSpec) -> Result<Box<dyn Objective>> {
    Ok(match spec.problem {
        Problem::Sphere => Box::new(Ellipsoid::new(spec.d, 1.0, spec.noise)?),
        Problem::Ellipsoid { k } => Box::new(Ellipsoid::new(spec.d, k, spec.noise)?),
        Problem::Rosenbrock => Box::new(Rosenbrock::new(spec.d, spec.noise)?),
        Problem::PointMass => {
            if spec.noise != NoiseModel::None {
                return Err(Error::Contract(
                    "the point-mass task has its own transition noise; use noise = none".into(),
                ));
            }
            Box::new(PointMassObjective::new(
                PointMassTask::default(),
                spec.layers.clone(),
            )?)
        }
    })
}

/// Seed of repetition `run_id`.
pub fn run_seed(spec: &RunSpec, run_id: u32) -> u64 {
    spec.seed.wrapping_add(run_id as u64)
}

/// Runs all repetitions of `spec` in order.
///
/// An invalid spec is an error. A failure inside one repetition ends only
/// that repetition, which gets a final row with NaN fitness and an
/// [`StopReason::Error`] event.
pub fn run_experiment(spec: &RunSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let obj = build_objective(spec)?;
    let mut out = ExperimentOutput::default();
    for run_id in 0..spec.runs {
        let (rows, events) = run_single(spec, obj.as_ref(), run_id)?;
        out.rows.extend(rows);
        out.events.extend(events);
    }
    Ok(out)
}

/// One repetition; only setup failures are returned as errors.
pub fn run_single(
    spec: &RunSpec,
    obj: &dyn Objective,
    run_id: u32,
) -> Result<(Vec<TraceRow>, Vec<RunEvent>)> {
    let root = spawn_stream(run_seed(spec, run_id), 0);
    let mut runner = Runner {
        spec,
        obj,
        run_id,
        root,
        budget: Budget::new(spec.budget)?,
        rows: Vec::new(),
        events: Vec::new(),
    };
    runner.run()?;
    Ok((runner.rows, runner.events))
}

struct Runner<'a> {
    spec: &'a RunSpec,
    obj: &'a dyn Objective,
    run_id: u32,
    root: RngStream,
    budget: Budget,
    rows: Vec<TraceRow>,
    events: Vec<RunEvent>,
}

struct GenStats {
    fitness: Vec<f64>,
    s: f64,
    n_eval: u32,
}

impl Runner<'_> {
    fn criteria(&self, lambda: usize) -> StopCriteria {
        let mut c = if self.spec.restarts {
            StopCriteria::for_dimension(self.spec.d, lambda)
        } else {
            StopCriteria {
                sigma_floor: SIGMA_FLOOR,
                stagnation_gens: u64::MAX,
                max_gens: u64::MAX,
                target_fitness: None,
            }
        };
        c.target_fitness = self.spec.target;
        c
    }

    fn run(&mut self) -> Result<()> {
        let spec = self.spec;
        let init = spec.init();
        let mut params = StrategyParams::with_lambda(spec.d, spec.algorithm, spec.lambda())?;
        let m0 = init.sample_mean(spec.d, &mut self.root.derive(&[0, INIT]));
        let mut es = Strategy::new(params.clone(), m0, init.sigma0)?;
        let mut uh = spec.uh_params.clone();
        let mut restart: u32 = 0;
        let mut history: Vec<f64> = Vec::new();

        loop {
            if self.budget.exhausted() {
                self.event(&es, restart, StopReason::BudgetExhausted, None, false);
                return Ok(());
            }
            let gen = es.generation();
            let stats = match self.generation(&mut es, &mut uh, restart, gen) {
                Ok(s) => s,
                Err(e) => {
                    self.push_failed_row(&es, restart, uh.n_eval);
                    self.event(&es, restart, StopReason::Error, Some(e.to_string()), false);
                    return Ok(());
                }
            };
            let best = stats
                .fitness
                .iter()
                .copied()
                .filter(|v| v.is_finite())
                .fold(f64::INFINITY, f64::min);
            history.push(best);
            let row = self.make_row(&es, restart, &stats);
            let stop = should_stop(es.state(), &history, &self.criteria(params.lambda));
            let due = gen % spec.log_every == 0 || stop.is_some() || self.budget.exhausted();
            if due {
                self.rows.push(row);
            }
            let Some(reason) = stop else { continue };

            let again = spec.restarts
                && !matches!(reason, StopReason::TargetReached)
                && !self.budget.exhausted();
            self.event(&es, restart, reason, None, again);
            if !again {
                return Ok(());
            }
            restart += 1;
            let mut rng = self.root.derive(&[restart as u64, INIT]);
            let (p, m0, s0) = restart_params(&params, &init, &mut rng)?;
            params = p;
            es = Strategy::new(params.clone(), m0, s0)?;
            uh = spec.uh_params.clone();
            history.clear();
        }
    }

    fn generation(
        &mut self,
        es: &mut Strategy,
        uh: &mut UncertaintyState,
        restart: u32,
        gen: u64,
    ) -> Result<GenStats> {
        let path = [restart as u64, gen];
        let offspring: Vec<DVector<f64>> =
            es.ask(&mut self.root.derive(&[path[0], path[1], SAMPLE]))?;
        let eval_rng = self.root.derive(&[path[0], path[1], EVAL]);
        self.budget.open_generation()?;
        let result = if self.spec.uh {
            uh_generation(self.obj, &offspring, &mut self.budget, uh, &eval_rng).map(|g| GenStats {
                fitness: g.fitness,
                s: g.s,
                n_eval: g.n_eval,
            })
        } else {
            offspring
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let mut r = eval_rng.derive(&[0, i as u64]);
                    evaluate_counted(self.obj, x.as_slice(), &mut self.budget, &mut r)
                })
                .collect::<Result<Vec<f64>>>()
                .map(|fitness| GenStats {
                    fitness,
                    s: f64::NAN,
                    n_eval: 1,
                })
        };
        self.budget.close_generation();
        let stats = result?;
        es.tell(&stats.fitness)?;
        Ok(stats)
    }

    fn make_row(&self, es: &Strategy, restart: u32, stats: &GenStats) -> TraceRow {
        let f = &stats.fitness;
        let lambda = f.len() as f64;
        let mean = f.iter().sum::<f64>() / lambda;
        let var = f.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / lambda;
        TraceRow {
            run_id: self.run_id,
            restart_index: restart,
            generation: es.generation(),
            evals_used: self.budget.used(),
            best_fitness: f
                .iter()
                .copied()
                .filter(|v| !v.is_nan())
                .fold(f64::NAN, f64::min),
            mean_fitness: mean,
            ref_fitness_at_mean: self.obj.reference(es.mean().as_slice()),
            sigma: es.sigma(),
            n_eval: stats.n_eval,
            fitness_std: var.sqrt(),
            s_stat: stats.s,
        }
    }

    fn push_failed_row(&mut self, es: &Strategy, restart: u32, n_eval: u32) {
        let evals = self.budget.used();
        if self.rows.last().is_some_and(|r| r.evals_used >= evals) {
            self.rows.pop();
        }
        self.rows.push(TraceRow {
            run_id: self.run_id,
            restart_index: restart,
            generation: es.generation(),
            evals_used: evals,
            best_fitness: f64::NAN,
            mean_fitness: f64::NAN,
            ref_fitness_at_mean: None,
            sigma: es.sigma(),
            n_eval,
            fitness_std: f64::NAN,
            s_stat: f64::NAN,
        });
    }

    fn event(
        &mut self,
        es: &Strategy,
        restart: u32,
        reason: StopReason,
        message: Option<String>,
        restarted: bool,
    ) {
        self.events.push(RunEvent {
            run_id: self.run_id,
            restart_index: restart,
            generation: es.generation(),
            evals_used: self.budget.used(),
            reason,
            message,
            restarted,
        });
    }
}

pub const EVENTS_HEADER: &str =
    "run_id,restart_index,generation,evals_used,reason,restarted,message";

pub fn write_events<W: std::io::Write>(mut out: W, events: &[RunEvent]) -> Result<()> {
    writeln!(out, "{EVENTS_HEADER}")?;
    for e in events {
        let msg = e.message.as_deref().unwrap_or("").replace([',', '\n'], ";");
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            e.run_id, e.restart_index, e.generation, e.evals_used, e.reason, e.restarted, msg
        )?;
    }
    Ok(())
}
