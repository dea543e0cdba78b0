//! Synthetic benchmark problems: sphere and ellipsoids of controlled
//! conditioning, Rosenbrock, and the noise models layered on top of them.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{contract, Error, Result};
use crate::objective::Objective;
use crate::rng::{spawn_stream, RngStream};

/// Diagonal of the ellipsoid Hessian `H`, with condition number `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipsoidSpec {
    pub d: usize,
    pub k: f64,
    pub eigs: Vec<f64>,
}

impl EllipsoidSpec {
    pub fn new(d: usize, k: f64) -> Result<Self> {
        Ok(Self {
            d,
            k,
            eigs: ellipsoid_eigs(d, k)?,
        })
    }
}

/// Eigenvalues `k^((i-1)/(d-1))`, `i = 1..=d`.
pub fn ellipsoid_eigs(d: usize, k: f64) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(contract("ellipsoid dimension must be positive"));
    }
    if !(k >= 1.0) || !k.is_finite() {
        return Err(contract(format!("condition number must be >= 1, got {k}")));
    }
    if d == 1 {
        return Ok(vec![1.0]);
    }
    let mut eigs: Vec<f64> = (0..d).map(|i| k.powf(i as f64 / (d - 1) as f64)).collect();
    // pin the endpoint so max/min == k exactly
    eigs[d - 1] = k;
    Ok(eigs)
}

/// `sqrt(sum eigs[i] * x[i]^2)`, computed with rescaling so that tiny or
/// huge `x` neither underflow nor overflow.
pub fn eval_ellipsoid(x: &[f64], spec: &EllipsoidSpec) -> Result<f64> {
    if x.len() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            got: x.len(),
        });
    }
    Ok(weighted_norm(x, &spec.eigs))
}

fn weighted_norm(x: &[f64], eigs: &[f64]) -> f64 {
    let scale = x
        .iter()
        .zip(eigs)
        .map(|(xi, e)| (xi * e.sqrt()).abs())
        .fold(0.0_f64, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = x
        .iter()
        .zip(eigs)
        .map(|(xi, e)| {
            let t = xi / scale;
            e * t * t
        })
        .sum();
    scale * s.sqrt()
}

/// Additive disturbance applied on top of a deterministic base fitness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    None,
    /// `fbar * (1 + c*u)`, `u ~ U(-1, 1)`.
    Multiplicative {
        c: f64,
    },
    /// `fbar + epsilon*g`, `g ~ N(0, 1)`.
    Additive {
        epsilon: f64,
    },
    /// Additive noise only where `fbar > threshold`.
    ThresholdedAdditive {
        epsilon: f64,
        threshold: f64,
    },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoiseModel::None => true,
            NoiseModel::Multiplicative { c } => c >= 0.0 && c.is_finite(),
            NoiseModel::Additive { epsilon } => epsilon >= 0.0 && epsilon.is_finite(),
            NoiseModel::ThresholdedAdditive { epsilon, threshold } => {
                epsilon >= 0.0 && epsilon.is_finite() && threshold.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(contract(format!("invalid noise model {self:?}")))
        }
    }
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            NoiseModel::None => write!(f, "none"),
            NoiseModel::Multiplicative { c } => write!(f, "multiplicative({c})"),
            NoiseModel::Additive { epsilon } => write!(f, "additive({epsilon})"),
            NoiseModel::ThresholdedAdditive { epsilon, threshold } => {
                write!(f, "thresholded_additive({epsilon}, {threshold})")
            }
        }
    }
}

pub fn apply_noise(fbar: f64, model: &NoiseModel, rng: &mut RngStream) -> f64 {
    match *model {
        NoiseModel::None => fbar,
        NoiseModel::Multiplicative { c } => {
            let u: f64 = rng.random_range(-1.0..1.0);
            fbar * (1.0 + c * u)
        }
        NoiseModel::Additive { epsilon } => {
            let g: f64 = rng.sample(StandardNormal);
            fbar + epsilon * g
        }
        NoiseModel::ThresholdedAdditive { epsilon, threshold } => {
            if fbar <= threshold {
                fbar
            } else {
                let g: f64 = rng.sample(StandardNormal);
                fbar + epsilon * g
            }
        }
    }
}

pub fn rosenbrock(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(contract("rosenbrock needs at least two variables"));
    }
    Ok(x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum())
}

/// Noisy ellipsoid `f(x) = sqrt(x'Hx) + N(x)`, optionally in a rotated basis.
#[derive(Clone, Debug)]
pub struct Ellipsoid {
    spec: EllipsoidSpec,
    noise: NoiseModel,
    rotation: Option<DMatrix<f64>>,
}

impl Ellipsoid {
    pub fn new(d: usize, k: f64, noise: NoiseModel) -> Result<Self> {
        noise.validate()?;
        Ok(Self {
            spec: EllipsoidSpec::new(d, k)?,
            noise,
            rotation: None,
        })
    }

    /// Noise-free sphere `||x||`.
    pub fn sphere(d: usize) -> Self {
        Self::new(d, 1.0, NoiseModel::None).expect("sphere is always valid")
    }

    /// Evaluates in the basis of a fixed random orthogonal matrix.
    pub fn with_rotation(mut self, seed: u64) -> Self {
        self.rotation = Some(random_orthogonal(self.spec.d, seed));
        self
    }

    pub fn spec(&self) -> &EllipsoidSpec {
        &self.spec
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    fn noise_free(&self, x: &[f64]) -> f64 {
        match &self.rotation {
            None => weighted_norm(x, &self.spec.eigs),
            Some(q) => {
                let y = q * DVector::from_column_slice(x);
                weighted_norm(y.as_slice(), &self.spec.eigs)
            }
        }
    }
}

impl Objective for Ellipsoid {
    fn dim(&self) -> usize {
        self.spec.d
    }

    fn eval(&self, x: &[f64], rng: &mut RngStream) -> f64 {
        apply_noise(self.noise_free(x), &self.noise, rng)
    }

    fn reference(&self, x: &[f64]) -> Option<f64> {
        Some(self.noise_free(x))
    }
}

#[derive(Clone, Debug)]
pub struct Rosenbrock {
    d: usize,
    noise: NoiseModel,
}

impl Rosenbrock {
    pub fn new(d: usize, noise: NoiseModel) -> Result<Self> {
        if d < 2 {
            return Err(contract("rosenbrock needs at least two variables"));
        }
        noise.validate()?;
        Ok(Self { d, noise })
    }
}

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &[f64], rng: &mut RngStream) -> f64 {
        let fbar = rosenbrock(x).unwrap_or(f64::NAN);
        apply_noise(fbar, &self.noise, rng)
    }

    fn reference(&self, x: &[f64]) -> Option<f64> {
        rosenbrock(x).ok()
    }
}

/// Orthogonal matrix from the QR factorization of a Gaussian matrix, with
/// signs fixed so the distribution is Haar.
pub fn random_orthogonal(d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = spawn_stream(seed, 0x0057_a7e5);
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}
