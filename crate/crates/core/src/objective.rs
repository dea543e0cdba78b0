//! Objective abstraction and evaluation budget accounting.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// A black-box fitness function to be minimized.
///
/// `eval` may be stochastic; all randomness must come from the supplied
/// stream so that evaluation is reproducible and safe to run concurrently.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64], rng: &mut RngStream) -> f64;

    /// Noise-free value, when one is known in closed form.
    fn reference(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64], rng: &mut RngStream) -> f64 {
        (**self).eval(x, rng)
    }
    fn reference(&self, x: &[f64]) -> Option<f64> {
        (**self).reference(x)
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64], rng: &mut RngStream) -> f64 {
        (**self).eval(x, rng)
    }
    fn reference(&self, x: &[f64]) -> Option<f64> {
        (**self).reference(x)
    }
}

/// Evaluation counter with a soft limit.
///
/// The limit is enforced between generations: once a generation has been
/// opened it may run to completion even if that overshoots `max_evals`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    max_evals: u64,
    used: u64,
    generation_open: bool,
}

impl Budget {
    pub fn new(max_evals: u64) -> Result<Self> {
        if max_evals == 0 {
            return Err(Error::Contract("budget must be positive".into()));
        }
        Ok(Self {
            max_evals,
            used: 0,
            generation_open: false,
        })
    }

    pub fn max_evals(&self) -> u64 {
        self.max_evals
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.max_evals.saturating_sub(self.used)
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.max_evals
    }

    /// Starts a generation. Fails if the budget is already used up.
    pub fn open_generation(&mut self) -> Result<()> {
        if self.exhausted() {
            return Err(Error::BudgetExhausted {
                used: self.used,
                max: self.max_evals,
            });
        }
        self.generation_open = true;
        Ok(())
    }

    /// Ends the current generation and returns the overshoot past `max_evals`.
    pub fn close_generation(&mut self) -> u64 {
        self.generation_open = false;
        self.used.saturating_sub(self.max_evals)
    }

    /// Adds evaluations performed elsewhere (e.g. by parallel workers).
    pub fn charge(&mut self, n: u64) -> Result<()> {
        if !self.generation_open && self.exhausted() {
            return Err(Error::BudgetExhausted {
                used: self.used,
                max: self.max_evals,
            });
        }
        self.used += n;
        Ok(())
    }
}

/// Evaluates `obj` at `x` and charges one unit to `budget`.
pub fn evaluate_counted<O: Objective + ?Sized>(
    obj: &O,
    x: &[f64],
    budget: &mut Budget,
    rng: &mut RngStream,
) -> Result<f64> {
    if x.len() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            got: x.len(),
        });
    }
    budget.charge(1)?;
    Ok(obj.eval(x, rng))
}
