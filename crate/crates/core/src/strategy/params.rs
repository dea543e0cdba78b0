use crate::error::{contract, Result};

/// Which transform the strategy adapts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// CSA-ES with the transform frozen at identity.
    Simple,
    /// Matrix adaptation with a full `d x d` transform.
    Ma,
    /// Limited-memory matrix adaptation with a set of direction vectors.
    LmMa,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Simple => "simple",
            Variant::Ma => "ma",
            Variant::LmMa => "lmma",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "simple" => Ok(Variant::Simple),
            "ma" => Ok(Variant::Ma),
            "lmma" => Ok(Variant::LmMa),
            other => Err(format!(
                "unknown algorithm {other:?} (expected simple, ma or lmma)"
            )),
        }
    }
}

/// Population size and learning rates of one strategy run.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyParams {
    pub variant: Variant,
    pub dim: usize,
    pub lambda: usize,
    pub mu: usize,
    pub weights: Vec<f64>,
    pub mu_w: f64,
    pub c_sigma: f64,
    pub d_sigma: f64,
    pub c_1: f64,
    pub c_mu: f64,
    pub n_vectors: usize,
    pub c_d: Vec<f64>,
    pub c_c: Vec<f64>,
}

/// Default population size `4 + floor(3 ln d)`.
pub fn default_lambda(d: usize) -> usize {
    4 + (3.0 * (d as f64).ln()).floor() as usize
}

pub fn default_params(d: usize, variant: Variant) -> Result<StrategyParams> {
    if d == 0 {
        return Err(contract("dimension must be positive"));
    }
    StrategyParams::with_lambda(d, variant, default_lambda(d))
}

/// Expected length of an `N(0, I_d)` vector.
pub fn chi_d(d: usize) -> f64 {
    let d = d as f64;
    d.sqrt() * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d))
}

fn clamp_rate(r: f64) -> f64 {
    r.clamp(f64::MIN_POSITIVE, 1.0)
}

impl StrategyParams {
    /// Default rates for an explicit population size. The number of LM-MA-ES
    /// direction vectors stays at its default for `d`, capped by `lambda`.
    pub fn with_lambda(d: usize, variant: Variant, lambda: usize) -> Result<Self> {
        if d == 0 {
            return Err(contract("dimension must be positive"));
        }
        if lambda < 4 {
            return Err(contract(format!(
                "population size must be >= 4, got {lambda}"
            )));
        }
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu)
            .map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.into_iter().map(|w| w / total).collect();
        let n_vectors = default_lambda(d).min(lambda);
        let mut p = Self {
            variant,
            dim: d,
            lambda,
            mu,
            weights,
            mu_w: 0.0,
            c_sigma: 0.0,
            d_sigma: 0.0,
            c_1: 0.0,
            c_mu: 0.0,
            n_vectors,
            c_d: Vec::new(),
            c_c: Vec::new(),
        };
        p.derive_rates();
        p.validate()?;
        Ok(p)
    }

    /// Replaces the recombination weights and recomputes every rate that
    /// depends on the selection mass.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        self.mu = weights.len();
        self.weights = weights;
        self.derive_rates();
        self.validate()?;
        Ok(self)
    }

    fn derive_rates(&mut self) {
        let d = self.dim as f64;
        let lambda = self.lambda as f64;
        let mu_w = 1.0 / self.weights.iter().map(|w| w * w).sum::<f64>();
        self.mu_w = mu_w;
        self.c_sigma = (mu_w + 2.0) / (d + mu_w + 5.0);
        self.d_sigma =
            1.0 + self.c_sigma + 2.0 * (((mu_w - 1.0) / (d + 1.0)).sqrt() - 1.0).max(0.0);
        self.c_1 = 2.0 / ((d + 1.3).powi(2) + mu_w);
        self.c_mu =
            (1.0 - self.c_1).min(2.0 * (mu_w - 2.0 + 1.0 / mu_w) / ((d + 2.0).powi(2) + mu_w));
        self.c_d = (0..self.n_vectors)
            .map(|j| clamp_rate(1.0 / (1.5f64.powi(j as i32) * d)))
            .collect();
        self.c_c = (0..self.n_vectors)
            .map(|j| clamp_rate(lambda / (4f64.powi(j as i32) * d)))
            .collect();
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < 4 {
            return Err(contract("population size must be >= 4"));
        }
        if self.mu == 0 || self.mu > (self.lambda as f64 / 2.0).round() as usize {
            return Err(contract(format!(
                "parent count {} out of range for lambda {}",
                self.mu, self.lambda
            )));
        }
        if self.weights.len() != self.mu {
            return Err(contract("need exactly mu weights"));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12
            || self.weights[0] <= 0.0
            || self.weights.iter().any(|&w| !(w >= 0.0))
            || self.weights.windows(2).any(|w| w[1] > w[0])
        {
            return Err(contract(
                "weights must be non-increasing, non-negative and sum to 1",
            ));
        }
        let in_unit = |r: f64| r > 0.0 && r <= 1.0;
        if !in_unit(self.c_sigma) || !in_unit(self.c_1) {
            return Err(contract("learning rates must lie in (0, 1]"));
        }
        // zero for single-parent weights (mu_w == 1)
        if !(self.c_mu >= 0.0 && self.c_mu <= 1.0) {
            return Err(contract("rank-mu rate must lie in [0, 1]"));
        }
        if !(self.d_sigma > 0.0) {
            return Err(contract("damping must be positive"));
        }
        if self.n_vectors > self.lambda
            || self.c_d.len() != self.n_vectors
            || self.c_c.len() != self.n_vectors
            || !self.c_d.iter().chain(&self.c_c).all(|&r| in_unit(r))
        {
            return Err(contract("invalid direction-vector rates"));
        }
        Ok(())
    }
}
