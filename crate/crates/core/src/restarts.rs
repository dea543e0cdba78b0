//! Stopping criteria for a single run and IPOP-style restart preparation.

use nalgebra::DVector;
use rand::Rng;

use crate::error::{contract, Result};
use crate::rng::RngStream;
use crate::strategy::{SigmaBound, StrategyParams, StrategyState};

/// Relative improvement below which a generation does not count as progress.
pub const STAGNATION_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct StopCriteria {
    pub sigma_floor: f64,
    pub stagnation_gens: u64,
    pub max_gens: u64,
    pub target_fitness: Option<f64>,
}

impl StopCriteria {
    /// Defaults for a run of dimension `d` and population `lambda`:
    /// stagnation after `100 + 30 d / lambda` generations.
    pub fn for_dimension(d: usize, lambda: usize) -> Self {
        Self {
            sigma_floor: 1e-20,
            stagnation_gens: 100 + (30.0 * d as f64 / lambda as f64).ceil() as u64,
            max_gens: u64::MAX,
            target_fitness: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_floor > 0.0) || self.stagnation_gens == 0 || self.max_gens == 0 {
            return Err(contract("stop thresholds must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StopReason {
    SigmaBelowFloor,
    Stagnation,
    MaxGenerations,
    TargetReached,
    NonFiniteState,
    BudgetExhausted,
    Error,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::SigmaBelowFloor => "sigma_below_floor",
            StopReason::Stagnation => "stagnation",
            StopReason::MaxGenerations => "max_generations",
            StopReason::TargetReached => "target_reached",
            StopReason::NonFiniteState => "non_finite_state",
            StopReason::BudgetExhausted => "budget_exhausted",
            StopReason::Error => "error",
        }
    }
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// First matching stop reason for a run whose per-generation best fitness
/// values are `history`.
pub fn should_stop(
    state: &StrategyState,
    history: &[f64],
    crit: &StopCriteria,
) -> Option<StopReason> {
    if state.sigma < crit.sigma_floor || state.sigma_bound == Some(SigmaBound::Floor) {
        return Some(StopReason::SigmaBelowFloor);
    }
    let n = crit.stagnation_gens as usize;
    if history.len() > n {
        let split = history.len() - n;
        let before = history[..split]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let recent = history[split..]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if !(recent < before - STAGNATION_TOLERANCE * before.abs()) {
            return Some(StopReason::Stagnation);
        }
    }
    if state.generation >= crit.max_gens {
        return Some(StopReason::MaxGenerations);
    }
    if let (Some(target), Some(&last)) = (crit.target_fitness, history.last()) {
        if last <= target {
            return Some(StopReason::TargetReached);
        }
    }
    let finite = state.sigma.is_finite()
        && state.mean.iter().all(|v| v.is_finite())
        && state.p_sigma.iter().all(|v| v.is_finite());
    if !finite || state.sigma_bound == Some(SigmaBound::Ceiling) {
        return Some(StopReason::NonFiniteState);
    }
    None
}

/// Box from which initial means are drawn, plus the initial step size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitConfig {
    pub lo: f64,
    pub hi: f64,
    pub sigma0: f64,
}

impl InitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo <= self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(contract("initialization box needs lo <= hi"));
        }
        if !(self.sigma0 > 0.0) || !self.sigma0.is_finite() {
            return Err(contract("initial step size must be positive"));
        }
        Ok(())
    }

    pub fn sample_mean(&self, d: usize, rng: &mut RngStream) -> DVector<f64> {
        if self.lo == self.hi {
            return DVector::from_element(d, self.lo);
        }
        DVector::from_fn(d, |_, _| rng.random_range(self.lo..self.hi))
    }
}

/// Parameters and initial conditions for the next restart: doubled
/// population, fresh mean from the box, initial step size. The transform
/// and evolution paths are reset by constructing a new `Strategy` from the
/// result.
pub fn restart_params(
    prev: &StrategyParams,
    init: &InitConfig,
    rng: &mut RngStream,
) -> Result<(StrategyParams, DVector<f64>, f64)> {
    let params = StrategyParams::with_lambda(prev.dim, prev.variant, 2 * prev.lambda)?;
    let m0 = init.sample_mean(prev.dim, rng);
    Ok((params, m0, init.sigma0))
}
