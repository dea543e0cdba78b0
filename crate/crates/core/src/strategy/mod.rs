//! Evolution strategies behind a single ask/tell interface.
//!
//! All three variants share cumulative step-size adaptation and weighted
//! recombination; they differ only in the transform `T` that maps a
//! standard-normal draw `z` to a mutation direction `d = T z`, so that the
//! sampling covariance is `sigma^2 T T'`:
//!
//! * [`Variant::Simple`]: `T = I`, never adapted.
//! * [`Variant::Ma`]: a full matrix `M`, updated multiplicatively and never
//!   inverted.
//! * [`Variant::LmMa`]: a sequence of direction vectors applied one after
//!   another, `O(d * n_vectors)` per sample.

mod params;

pub use params::{chi_d, default_lambda, default_params, StrategyParams, Variant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const SIGMA_FLOOR: f64 = 1e-300;
pub const SIGMA_CEILING: f64 = 1e100;

/// Factor applied to sigma when a generation has too few finite fitness
/// values to recombine.
pub const NON_FINITE_SIGMA_FACTOR: f64 = 0.8;

#[derive(Clone, Debug, PartialEq)]
pub enum Transform {
    Identity,
    Full(DMatrix<f64>),
    LowRank(Vec<DVector<f64>>),
}

impl Transform {
    pub fn initial(variant: Variant, d: usize, n_vectors: usize) -> Self {
        match variant {
            Variant::Simple => Transform::Identity,
            Variant::Ma => Transform::Full(DMatrix::identity(d, d)),
            Variant::LmMa => Transform::LowRank(vec![DVector::zeros(d); n_vectors]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaBound {
    Floor,
    Ceiling,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrategyState {
    pub mean: DVector<f64>,
    pub sigma: f64,
    pub transform: Transform,
    pub p_sigma: DVector<f64>,
    pub generation: u64,
    /// Standard-normal draws of the most recent `ask`, one column per offspring.
    pub last_z: DMatrix<f64>,
    /// Their images under the transform.
    pub last_d: DMatrix<f64>,
    /// Set when sigma was clamped to one of its hard bounds.
    pub sigma_bound: Option<SigmaBound>,
}

impl StrategyState {
    /// Applies the sampling transform to one standard-normal vector.
    pub fn transform_apply(
        &self,
        params: &StrategyParams,
        z: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        if z.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: z.len(),
            });
        }
        Ok(match &self.transform {
            Transform::Identity => z.clone(),
            Transform::Full(m) => m * z,
            Transform::LowRank(vs) => {
                let mut d = z.clone();
                low_rank_apply(vs, &params.c_d, self.generation, d.as_mut_slice());
                d
            }
        })
    }
}

/// `d <- (1 - c_j) d + c_j v_j (v_j' d)` for every vector `j` (1-based) that
/// is active, i.e. `generation >= j`.
fn low_rank_apply(vs: &[DVector<f64>], c_d: &[f64], generation: u64, d: &mut [f64]) {
    let active = (generation.min(vs.len() as u64)) as usize;
    for (v, &c) in vs.iter().zip(c_d).take(active) {
        let proj: f64 = v.iter().zip(d.iter()).map(|(a, b)| a * b).sum();
        let (a, b) = (c * proj, 1.0 - c);
        for (di, vi) in d.iter_mut().zip(v.iter()) {
            *di = a * vi + b * *di;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TellOutcome {
    Updated,
    /// Too many non-finite fitness values: only sigma was shrunk.
    Skipped {
        non_finite: usize,
    },
}

/// One run of an evolution strategy.
#[derive(Clone, Debug)]
pub struct Strategy {
    params: StrategyParams,
    state: StrategyState,
    awaiting_tell: bool,
}

impl Strategy {
    pub fn new(params: StrategyParams, mean: DVector<f64>, sigma: f64) -> Result<Self> {
        params.validate()?;
        if mean.len() != params.dim {
            return Err(Error::DimensionMismatch {
                expected: params.dim,
                got: mean.len(),
            });
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Contract(format!(
                "initial step size must be positive, got {sigma}"
            )));
        }
        let d = params.dim;
        let state = StrategyState {
            transform: Transform::initial(params.variant, d, params.n_vectors),
            mean,
            sigma,
            p_sigma: DVector::zeros(d),
            generation: 0,
            last_z: DMatrix::zeros(d, 0),
            last_d: DMatrix::zeros(d, 0),
            sigma_bound: None,
        };
        Ok(Self {
            params,
            state,
            awaiting_tell: false,
        })
    }

    pub fn params(&self) -> &StrategyParams {
        &self.params
    }

    pub fn state(&self) -> &StrategyState {
        &self.state
    }

    /// Mutable state access for tests and restarts that need to seed a
    /// particular transform.
    pub fn state_mut(&mut self) -> &mut StrategyState {
        &mut self.state
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.state.mean
    }

    pub fn sigma(&self) -> f64 {
        self.state.sigma
    }

    pub fn generation(&self) -> u64 {
        self.state.generation
    }

    pub fn awaiting_tell(&self) -> bool {
        self.awaiting_tell
    }

    /// Samples `lambda` offspring `m + sigma * T z`.
    pub fn ask(&mut self, rng: &mut RngStream) -> Result<Vec<DVector<f64>>> {
        if self.awaiting_tell {
            return Err(Error::Protocol("ask called twice without tell"));
        }
        let d = self.params.dim;
        let lambda = self.params.lambda;
        let draws: Vec<f64> = (0..d * lambda)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        self.ask_with_normals(DMatrix::from_vec(d, lambda, draws))
    }

    /// Like [`ask`](Self::ask) with caller-supplied normal draws (one column
    /// per offspring).
    pub fn ask_with_normals(&mut self, z: DMatrix<f64>) -> Result<Vec<DVector<f64>>> {
        if self.awaiting_tell {
            return Err(Error::Protocol("ask called twice without tell"));
        }
        let d = self.params.dim;
        if z.nrows() != d || z.ncols() != self.params.lambda {
            return Err(Error::Contract(format!(
                "expected {}x{} normal draws, got {}x{}",
                d,
                self.params.lambda,
                z.nrows(),
                z.ncols()
            )));
        }
        let dirs = match &self.state.transform {
            Transform::Identity => z.clone(),
            Transform::Full(m) => m * &z,
            Transform::LowRank(vs) => {
                let mut out = z.clone();
                let active = self.state.generation;
                for col in out.as_mut_slice().chunks_exact_mut(d) {
                    low_rank_apply(vs, &self.params.c_d, active, col);
                }
                out
            }
        };
        let sigma = self.state.sigma;
        let offspring = dirs
            .column_iter()
            .map(|dcol| {
                DVector::from_iterator(
                    d,
                    self.state
                        .mean
                        .iter()
                        .zip(dcol.iter())
                        .map(|(m, di)| m + sigma * di),
                )
            })
            .collect();
        self.state.last_z = z;
        self.state.last_d = dirs;
        self.awaiting_tell = true;
        Ok(offspring)
    }

    /// Updates mean, step size and transform from the fitness of the last
    /// `ask` (lower is better).
    pub fn tell(&mut self, fitness: &[f64]) -> Result<TellOutcome> {
        if !self.awaiting_tell {
            return Err(Error::Protocol("tell called without a pending ask"));
        }
        if fitness.len() != self.params.lambda {
            return Err(Error::DimensionMismatch {
                expected: self.params.lambda,
                got: fitness.len(),
            });
        }
        self.awaiting_tell = false;

        let non_finite = fitness.iter().filter(|f| !f.is_finite()).count();
        if non_finite == fitness.len() {
            return Err(Error::UpdateSkipped(non_finite));
        }
        if non_finite >= self.params.mu {
            self.state.generation += 1;
            self.set_sigma(self.state.sigma * NON_FINITE_SIGMA_FACTOR);
            return Ok(TellOutcome::Skipped { non_finite });
        }

        let order = rank_order(fitness);
        let p = &self.params;
        let d = p.dim;
        let selected = &order[..p.mu];

        let mut z_w = DVector::zeros(d);
        let mut d_w = DVector::zeros(d);
        for (&idx, &w) in selected.iter().zip(&p.weights) {
            z_w.axpy(w, &self.state.last_z.column(idx), 1.0);
            d_w.axpy(w, &self.state.last_d.column(idx), 1.0);
        }

        let sigma = self.state.sigma;
        for (m, dw) in self.state.mean.iter_mut().zip(d_w.iter()) {
            *m += sigma * dw;
        }

        let cs = p.c_sigma;
        self.state
            .p_sigma
            .axpy((cs * (2.0 - cs) * p.mu_w).sqrt(), &z_w, 1.0 - cs);

        match &mut self.state.transform {
            Transform::Identity => {}
            Transform::Full(m) => {
                // M (I + c1/2 (p p' - I) + cmu/2 (sum w z z' - I))
                //   = (1 - c1/2 - cmu/2) M + c1/2 (M p) p' + cmu/2 sum w d z'
                let mp = &*m * &self.state.p_sigma;
                let mut dsel = DMatrix::zeros(d, p.mu);
                let mut zsel = DMatrix::zeros(d, p.mu);
                for (k, (&idx, &w)) in selected.iter().zip(&p.weights).enumerate() {
                    dsel.column_mut(k)
                        .axpy(w, &self.state.last_d.column(idx), 0.0);
                    zsel.column_mut(k).copy_from(&self.state.last_z.column(idx));
                }
                let keep = 1.0 - 0.5 * p.c_1 - 0.5 * p.c_mu;
                m.gemm(0.5 * p.c_mu, &dsel, &zsel.transpose(), keep);
                m.ger(0.5 * p.c_1, &mp, &self.state.p_sigma, 1.0);
            }
            Transform::LowRank(vs) => {
                for (v, &cc) in vs.iter_mut().zip(&p.c_c) {
                    v.axpy((cc * (2.0 - cc) * p.mu_w).sqrt(), &z_w, 1.0 - cc);
                }
            }
        }

        let ratio = self.state.p_sigma.norm() / chi_d(d);
        let new_sigma = sigma * ((cs / p.d_sigma) * (ratio - 1.0)).exp();
        self.state.generation += 1;
        self.set_sigma(new_sigma);
        Ok(TellOutcome::Updated)
    }

    fn set_sigma(&mut self, s: f64) {
        if s.is_nan() || s > SIGMA_CEILING {
            self.state.sigma = SIGMA_CEILING;
            self.state.sigma_bound = Some(SigmaBound::Ceiling);
        } else if s < SIGMA_FLOOR {
            self.state.sigma = SIGMA_FLOOR;
            self.state.sigma_bound = Some(SigmaBound::Floor);
        } else {
            self.state.sigma = s;
        }
    }
}

/// Indices sorted by ascending fitness; non-finite values rank last, ties
/// keep index order.
pub fn rank_order(fitness: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fitness.len()).collect();
    idx.sort_by(|&a, &b| {
        let (fa, fb) = (fitness[a], fitness[b]);
        match (fa.is_finite(), fb.is_finite()) {
            (true, true) => fa.partial_cmp(&fb).unwrap(),
            (true, false) => std::cmp::Ordering::Less,
            (false, true) => std::cmp::Ordering::Greater,
            (false, false) => std::cmp::Ordering::Equal,
        }
    });
    idx
}

/// Rank of each individual (0 = best) under [`rank_order`].
pub fn ranks(fitness: &[f64]) -> Vec<usize> {
    let mut r = vec![0; fitness.len()];
    for (pos, i) in rank_order(fitness).into_iter().enumerate() {
        r[i] = pos;
    }
    r
}
