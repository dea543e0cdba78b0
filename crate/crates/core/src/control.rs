//! Episodic controller design on a stochastic point-mass navigation task.
//!
//! A feedforward tanh network maps the observation (position, velocity,
//! offset to the target) to an acceleration. The fitness of a parameter
//! vector is the negated discounted return of a single Monte Carlo episode,
//! so repeated evaluations of the same controller differ.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{contract, Error, Result};
use crate::objective::Objective;
use crate::rng::RngStream;

pub const OBSERVATION_SIZE: usize = 6;
pub const ACTION_SIZE: usize = 2;

/// Layer sizes of the default controller: hidden layers 30-30-10.
pub const DEFAULT_LAYERS: [usize; 5] = [OBSERVATION_SIZE, 30, 30, 10, ACTION_SIZE];

/// Number of weights and biases of a fully connected network.
pub fn param_count(layer_sizes: &[usize]) -> Result<usize> {
    if layer_sizes.len() < 2 {
        return Err(contract(
            "a network needs at least an input and an output layer",
        ));
    }
    if layer_sizes.contains(&0) {
        return Err(contract("layer sizes must be positive"));
    }
    Ok(layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum())
}

/// Feedforward network with tanh on every layer. Parameters are stored
/// layer by layer: the row-major `out x in` weight matrix, then the biases.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyNetwork {
    layer_sizes: Vec<usize>,
    theta: Vec<f64>,
}

impl PolicyNetwork {
    pub fn new(layer_sizes: Vec<usize>, theta: Vec<f64>) -> Result<Self> {
        let n = param_count(&layer_sizes)?;
        if theta.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: theta.len(),
            });
        }
        Ok(Self { layer_sizes, theta })
    }

    pub fn zeros(layer_sizes: Vec<usize>) -> Result<Self> {
        let n = param_count(&layer_sizes)?;
        Self::new(layer_sizes, vec![0.0; n])
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn forward(&self, observation: &[f64]) -> Result<Vec<f64>> {
        policy_forward(&self.layer_sizes, &self.theta, observation)
    }
}

pub fn policy_forward(
    layer_sizes: &[usize],
    theta: &[f64],
    observation: &[f64],
) -> Result<Vec<f64>> {
    if observation.len() != layer_sizes[0] {
        return Err(Error::DimensionMismatch {
            expected: layer_sizes[0],
            got: observation.len(),
        });
    }
    let mut cur = observation.to_vec();
    let mut next = Vec::new();
    forward_into(layer_sizes, theta, &mut cur, &mut next);
    Ok(cur)
}

/// Runs the network in place: on return `cur` holds the output.
fn forward_into(layer_sizes: &[usize], theta: &[f64], cur: &mut Vec<f64>, next: &mut Vec<f64>) {
    let mut offset = 0;
    for w in layer_sizes.windows(2) {
        let (n_in, n_out) = (w[0], w[1]);
        let weights = &theta[offset..offset + n_in * n_out];
        let bias = &theta[offset + n_in * n_out..offset + n_in * n_out + n_out];
        offset += n_in * n_out + n_out;
        next.clear();
        next.extend(weights.chunks_exact(n_in).zip(bias).map(|(row, b)| {
            let s: f64 = row.iter().zip(cur.iter()).map(|(a, x)| a * x).sum();
            (s + b).tanh()
        }));
        std::mem::swap(cur, next);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointMassTask {
    pub horizon: usize,
    pub gamma: f64,
    /// Standard deviation of the Gaussian velocity perturbation per step.
    pub transition_noise: f64,
    /// Maximum acceleration per step and axis.
    pub action_scale: f64,
    pub target: [f64; 2],
    /// Fixed start position; drawn from `[-1, 1]^2` when absent.
    pub start: Option<[f64; 2]>,
}

impl Default for PointMassTask {
    fn default() -> Self {
        Self {
            horizon: 100,
            gamma: 1.0,
            transition_noise: 0.05,
            action_scale: 0.1,
            target: [0.0, 0.0],
            start: None,
        }
    }
}

impl PointMassTask {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(contract("horizon must be at least one step"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(contract("discount must lie in (0, 1]"));
        }
        if !(self.transition_noise >= 0.0) || !(self.action_scale >= 0.0) {
            return Err(contract("noise and action scale must be non-negative"));
        }
        Ok(())
    }
}

/// Negated discounted return of one episode; `+inf` if the state blows up.
pub fn rollout(task: &PointMassTask, net: &PolicyNetwork, rng: &mut RngStream) -> Result<f64> {
    check_io(net.layer_sizes())?;
    Ok(rollout_raw(task, net.layer_sizes(), net.theta(), rng))
}

fn check_io(layers: &[usize]) -> Result<()> {
    if layers.first() != Some(&OBSERVATION_SIZE) || layers.last() != Some(&ACTION_SIZE) {
        return Err(contract(format!(
            "controller must map {OBSERVATION_SIZE} inputs to {ACTION_SIZE} outputs"
        )));
    }
    Ok(())
}

fn rollout_raw(task: &PointMassTask, layers: &[usize], theta: &[f64], rng: &mut RngStream) -> f64 {
    let mut pos = match task.start {
        Some(p) => p,
        None => [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)],
    };
    let mut vel = [0.0; 2];
    let mut ret = 0.0;
    let mut discount = 1.0;
    let mut cur = Vec::with_capacity(64);
    let mut next = Vec::with_capacity(64);
    for _ in 0..task.horizon {
        cur.clear();
        cur.extend_from_slice(&[
            pos[0],
            pos[1],
            vel[0],
            vel[1],
            task.target[0] - pos[0],
            task.target[1] - pos[1],
        ]);
        forward_into(layers, theta, &mut cur, &mut next);
        for k in 0..2 {
            let noise = if task.transition_noise > 0.0 {
                task.transition_noise * rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            };
            vel[k] += task.action_scale * cur[k] + noise;
            pos[k] += vel[k];
        }
        let dist = ((pos[0] - task.target[0]).powi(2) + (pos[1] - task.target[1]).powi(2)).sqrt();
        ret -= discount * dist;
        discount *= task.gamma;
    }
    let fitness = -ret;
    if fitness.is_finite() {
        fitness
    } else {
        f64::INFINITY
    }
}

/// The control task as a black-box objective over the flat parameter vector.
#[derive(Clone, Debug)]
pub struct PointMassObjective {
    task: PointMassTask,
    layers: Vec<usize>,
    dim: usize,
}

impl PointMassObjective {
    pub fn new(task: PointMassTask, layers: Vec<usize>) -> Result<Self> {
        task.validate()?;
        check_io(&layers)?;
        let dim = param_count(&layers)?;
        Ok(Self { task, layers, dim })
    }

    pub fn task(&self) -> &PointMassTask {
        &self.task
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }
}

impl Objective for PointMassObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64], rng: &mut RngStream) -> f64 {
        rollout_raw(&self.task, &self.layers, x, rng)
    }
}
