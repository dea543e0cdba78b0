//! Uncertainty handling by adaptive re-evaluation.
//!
//! Each generation a small random subset of the offspring is evaluated a
//! second time. How far those individuals move in the ranking measures how
//! much the noise dominates the fitness signal; when the movement exceeds a
//! tolerance the number of averaged evaluations per individual grows,
//! otherwise it shrinks back towards one.

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::error::{contract, Result};
use crate::objective::{evaluate_counted, Budget, Objective};
use crate::rng::RngStream;
use crate::strategy::ranks;

#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintyState {
    /// Evaluations averaged per individual.
    pub n_eval: u32,
    pub n_max: u32,
    /// Rank-change tolerance.
    pub theta: f64,
    /// Multiplicative adaptation factor.
    pub alpha: f64,
    /// Fraction of the population that is re-evaluated.
    pub reev_fraction: f64,
    pub last_s: f64,
}

impl Default for UncertaintyState {
    fn default() -> Self {
        Self {
            n_eval: 1,
            n_max: 100,
            theta: 0.2,
            alpha: 1.5,
            reev_fraction: 0.1,
            last_s: 0.0,
        }
    }
}

impl UncertaintyState {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 || self.n_eval == 0 || self.n_eval > self.n_max {
            return Err(contract("need 1 <= n_eval <= n_max"));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(contract("theta must lie in [0, 1]"));
        }
        if !(self.alpha > 1.0) {
            return Err(contract("alpha must exceed 1"));
        }
        if !(self.reev_fraction > 0.0 && self.reev_fraction <= 1.0) {
            return Err(contract("re-evaluation fraction must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Number of individuals re-evaluated in a population of `lambda`.
    pub fn reevaluations(&self, lambda: usize) -> usize {
        ((self.reev_fraction * lambda as f64).ceil() as usize).clamp(1, lambda)
    }
}

/// Mean of `n` counted evaluations drawn from `rng`.
pub fn uh_evaluate<O: Objective + ?Sized>(
    obj: &O,
    x: &[f64],
    n: u32,
    budget: &mut Budget,
    rng: &mut RngStream,
) -> Result<f64> {
    if n == 0 {
        return Err(contract("need at least one evaluation"));
    }
    let mut sum = 0.0;
    for _ in 0..n {
        sum += evaluate_counted(obj, x, budget, rng)?;
    }
    Ok(sum / n as f64)
}

/// Mean normalized rank displacement of the re-evaluated individuals.
pub fn uh_rank_change(
    f_first: &[f64],
    f_second_at: &BTreeMap<usize, f64>,
    lambda: usize,
) -> Result<f64> {
    if lambda < 2 {
        return Err(contract("rank change needs lambda >= 2"));
    }
    if f_first.len() != lambda {
        return Err(contract(format!(
            "expected {lambda} fitness values, got {}",
            f_first.len()
        )));
    }
    if f_second_at.is_empty() {
        return Err(contract("no re-evaluated individuals"));
    }
    if let Some((&i, _)) = f_second_at.iter().find(|(&i, _)| i >= lambda) {
        return Err(contract(format!("re-evaluated index {i} out of range")));
    }
    let r1 = ranks(f_first);
    let mut second = f_first.to_vec();
    for (&i, &v) in f_second_at {
        second[i] = v;
    }
    let r2 = ranks(&second);
    let total: usize = f_second_at.keys().map(|&i| r1[i].abs_diff(r2[i])).sum();
    Ok(total as f64 / (f_second_at.len() * (lambda - 1)) as f64)
}

/// Grows `n_eval` when `s` exceeds the tolerance, shrinks it otherwise.
pub fn uh_adapt(mut state: UncertaintyState, s: f64) -> UncertaintyState {
    let n = state.n_eval as f64;
    state.n_eval = if s > state.theta {
        ((n + 1.0).max((state.alpha * n).ceil()) as u32).min(state.n_max)
    } else {
        ((n / state.alpha).floor() as u32).max(1)
    };
    state.last_s = s;
    state
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationEval {
    /// Fitness to pass to `tell`.
    pub fitness: Vec<f64>,
    pub s: f64,
    /// Evaluations averaged per individual in this generation.
    pub n_eval: u32,
    pub reevaluated: Vec<usize>,
    pub evals: u64,
}

/// Evaluates one generation with re-evaluation and adapts `uh.n_eval`.
///
/// Every individual gets its own stream derived from `rng`, so the result
/// does not depend on evaluation order.
pub fn uh_generation<O: Objective + ?Sized>(
    obj: &O,
    offspring: &[DVector<f64>],
    budget: &mut Budget,
    uh: &mut UncertaintyState,
    rng: &RngStream,
) -> Result<GenerationEval> {
    let lambda = offspring.len();
    let n = uh.n_eval;
    let start = budget.used();

    let mut first = Vec::with_capacity(lambda);
    for (i, x) in offspring.iter().enumerate() {
        let mut r = rng.derive(&[0, i as u64]);
        first.push(uh_evaluate(obj, x.as_slice(), n, budget, &mut r)?);
    }

    let k = uh.reevaluations(lambda);
    let mut pick = rng.derive(&[2]);
    let mut chosen = rand::seq::index::sample(&mut pick, lambda, k).into_vec();
    chosen.sort_unstable();

    let mut second = BTreeMap::new();
    for &i in &chosen {
        let mut r = rng.derive(&[1, i as u64]);
        second.insert(
            i,
            uh_evaluate(obj, offspring[i].as_slice(), n, budget, &mut r)?,
        );
    }

    let s = uh_rank_change(&first, &second, lambda)?;
    let mut fitness = first;
    for (&i, &v) in &second {
        fitness[i] = 0.5 * (fitness[i] + v);
    }
    *uh = uh_adapt(uh.clone(), s);

    Ok(GenerationEval {
        fitness,
        s,
        n_eval: n,
        reevaluated: chosen,
        evals: budget.used() - start,
    })
}
