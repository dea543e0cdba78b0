//! Python bindings for the evolution strategies, benchmarks and harness.

use std::collections::BTreeMap;

use nalgebra::DVector;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hidra_core::benchmarks::{self, NoiseModel};
use hidra_core::control::{self, PointMassTask, PolicyNetwork};
use hidra_core::harness;
use hidra_core::strategy::{self as es, TellOutcome};
use hidra_core::uncertainty::{self, UncertaintyState};
use hidra_core::{Error, Objective, Variant};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Contract(_)
        | Error::DimensionMismatch { .. }
        | Error::Parse { .. }
        | Error::Csv { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn variant(name: &str) -> PyResult<Variant> {
    name.parse().map_err(PyValueError::new_err)
}

fn noise(spec: &str) -> PyResult<NoiseModel> {
    harness::parse_noise(spec).map_err(PyValueError::new_err)
}

/// Seeded random stream; `derive` gives independent child streams.
#[pyclass(name = "RngStream")]
struct PyRngStream {
    inner: hidra_core::RngStream,
}

#[pymethods]
impl PyRngStream {
    #[new]
    #[pyo3(signature = (seed, index=0))]
    fn new(seed: u64, index: u64) -> Self {
        Self {
            inner: hidra_core::spawn_stream(seed, index),
        }
    }

    fn derive(&self, path: Vec<u64>) -> Self {
        Self {
            inner: self.inner.derive(&path),
        }
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    #[getter]
    fn stream_index(&self) -> u64 {
        self.inner.stream_index()
    }
}

/// Ask/tell evolution strategy (`simple`, `ma` or `lmma`).
#[pyclass(name = "Strategy")]
struct PyStrategy {
    inner: es::Strategy,
}

#[pymethods]
impl PyStrategy {
    #[new]
    #[pyo3(signature = (algorithm, mean, sigma, lam=None))]
    fn new(algorithm: &str, mean: Vec<f64>, sigma: f64, lam: Option<usize>) -> PyResult<Self> {
        let v = variant(algorithm)?;
        let d = mean.len();
        let params = match lam {
            Some(l) => es::StrategyParams::with_lambda(d, v, l),
            None => es::default_params(d, v),
        }
        .map_err(to_py)?;
        let inner = es::Strategy::new(params, DVector::from_vec(mean), sigma).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Samples one generation of offspring.
    fn ask(&mut self, rng: &mut PyRngStream) -> PyResult<Vec<Vec<f64>>> {
        let xs = self.inner.ask(&mut rng.inner).map_err(to_py)?;
        Ok(xs.into_iter().map(|x| x.as_slice().to_vec()).collect())
    }

    /// Updates from the fitness of the last `ask`; returns `"updated"` or
    /// `"skipped"`.
    fn tell(&mut self, fitness: Vec<f64>) -> PyResult<&'static str> {
        match self.inner.tell(&fitness).map_err(to_py)? {
            TellOutcome::Updated => Ok("updated"),
            TellOutcome::Skipped { .. } => Ok("skipped"),
        }
    }

    #[getter]
    fn mean(&self) -> Vec<f64> {
        self.inner.mean().as_slice().to_vec()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma()
    }

    #[getter]
    fn generation(&self) -> u64 {
        self.inner.generation()
    }

    #[getter]
    fn lam(&self) -> usize {
        self.inner.params().lambda
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.params().dim
    }
}

/// Default strategy parameters for dimension `d` as a dict.
#[pyfunction]
fn default_params<'py>(py: Python<'py>, d: usize, algorithm: &str) -> PyResult<Bound<'py, PyDict>> {
    let p = es::default_params(d, variant(algorithm)?).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("lambda", p.lambda)?;
    out.set_item("mu", p.mu)?;
    out.set_item("weights", p.weights)?;
    out.set_item("mu_w", p.mu_w)?;
    out.set_item("c_sigma", p.c_sigma)?;
    out.set_item("d_sigma", p.d_sigma)?;
    out.set_item("c_1", p.c_1)?;
    out.set_item("c_mu", p.c_mu)?;
    out.set_item("n_vectors", p.n_vectors)?;
    out.set_item("c_d", p.c_d)?;
    out.set_item("c_c", p.c_c)?;
    Ok(out)
}

/// Noise-free ellipsoid value `sqrt(x' H x)` with condition number `k`.
#[pyfunction]
fn ellipsoid(x: Vec<f64>, k: f64) -> PyResult<f64> {
    let spec = benchmarks::EllipsoidSpec::new(x.len(), k).map_err(to_py)?;
    benchmarks::eval_ellipsoid(&x, &spec).map_err(to_py)
}

#[pyfunction]
fn rosenbrock(x: Vec<f64>) -> PyResult<f64> {
    benchmarks::rosenbrock(&x).map_err(to_py)
}

/// Noisy ellipsoid objective; `noise_model` uses the configuration syntax,
/// e.g. `"additive(1)"`.
#[pyclass(name = "Ellipsoid")]
struct PyEllipsoid {
    inner: benchmarks::Ellipsoid,
}

#[pymethods]
impl PyEllipsoid {
    #[new]
    #[pyo3(signature = (d, k=1.0, noise_model="none"))]
    fn new(d: usize, k: f64, noise_model: &str) -> PyResult<Self> {
        let inner = benchmarks::Ellipsoid::new(d, k, noise(noise_model)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn eval(&self, x: Vec<f64>, rng: &mut PyRngStream) -> PyResult<f64> {
        check_dim(self.inner.dim(), x.len())?;
        Ok(self.inner.eval(&x, &mut rng.inner))
    }

    fn reference(&self, x: Vec<f64>) -> PyResult<f64> {
        check_dim(self.inner.dim(), x.len())?;
        Ok(self.inner.reference(&x).unwrap_or(f64::NAN))
    }
}

fn check_dim(expected: usize, got: usize) -> PyResult<()> {
    if expected == got {
        Ok(())
    } else {
        Err(to_py(Error::DimensionMismatch { expected, got }))
    }
}

/// Rank-change statistic of a re-evaluated population.
#[pyfunction]
fn uh_rank_change(f_first: Vec<f64>, f_second: BTreeMap<usize, f64>) -> PyResult<f64> {
    let lambda = f_first.len();
    uncertainty::uh_rank_change(&f_first, &f_second, lambda).map_err(to_py)
}

/// Next evaluation count after observing statistic `s`.
#[pyfunction]
#[pyo3(signature = (n_eval, s, theta=0.2, alpha=1.5, n_max=100))]
fn uh_adapt(n_eval: u32, s: f64, theta: f64, alpha: f64, n_max: u32) -> PyResult<u32> {
    let state = UncertaintyState {
        n_eval,
        n_max,
        theta,
        alpha,
        ..UncertaintyState::default()
    };
    state.validate().map_err(to_py)?;
    Ok(uncertainty::uh_adapt(state, s).n_eval)
}

#[pyfunction]
fn param_count(layers: Vec<usize>) -> PyResult<usize> {
    control::param_count(&layers).map_err(to_py)
}

#[pyfunction]
fn policy_forward(
    layers: Vec<usize>,
    theta: Vec<f64>,
    observation: Vec<f64>,
) -> PyResult<Vec<f64>> {
    control::policy_forward(&layers, &theta, &observation).map_err(to_py)
}

/// Negated return of one point-mass episode.
#[pyfunction]
#[pyo3(signature = (layers, theta, rng, horizon=100, transition_noise=0.05, start=None))]
fn rollout(
    layers: Vec<usize>,
    theta: Vec<f64>,
    rng: &mut PyRngStream,
    horizon: usize,
    transition_noise: f64,
    start: Option<[f64; 2]>,
) -> PyResult<f64> {
    let task = PointMassTask {
        horizon,
        transition_noise,
        start,
        ..PointMassTask::default()
    };
    task.validate().map_err(to_py)?;
    let net = PolicyNetwork::new(layers, theta).map_err(to_py)?;
    control::rollout(&task, &net, &mut rng.inner).map_err(to_py)
}

/// Labels of the cells a configuration expands to.
#[pyfunction]
fn list_cells(config: &str) -> PyResult<Vec<String>> {
    let specs = harness::parse_config(config).map_err(to_py)?;
    Ok(specs.iter().map(|s| s.label()).collect())
}

/// Runs one cell of a configuration and returns its trace as CSV text.
#[pyfunction]
#[pyo3(signature = (config, cell=0, seed=None))]
fn run_experiment(
    py: Python<'_>,
    config: &str,
    cell: usize,
    seed: Option<u64>,
) -> PyResult<String> {
    let mut specs = harness::parse_config(config).map_err(to_py)?;
    harness::override_seeds(&mut specs, seed, None).map_err(to_py)?;
    let spec = specs
        .get(cell)
        .ok_or_else(|| {
            PyValueError::new_err(format!("cell {cell} out of range ({} cells)", specs.len()))
        })?
        .clone();
    let out = py
        .detach(|| harness::run_experiment(&spec))
        .map_err(to_py)?;
    Ok(harness::trace_to_string(&out.rows))
}

#[pymodule]
fn hidra(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRngStream>()?;
    m.add_class::<PyStrategy>()?;
    m.add_class::<PyEllipsoid>()?;
    m.add_function(wrap_pyfunction!(default_params, m)?)?;
    m.add_function(wrap_pyfunction!(ellipsoid, m)?)?;
    m.add_function(wrap_pyfunction!(rosenbrock, m)?)?;
    m.add_function(wrap_pyfunction!(uh_rank_change, m)?)?;
    m.add_function(wrap_pyfunction!(uh_adapt, m)?)?;
    m.add_function(wrap_pyfunction!(param_count, m)?)?;
    m.add_function(wrap_pyfunction!(policy_forward, m)?)?;
    m.add_function(wrap_pyfunction!(rollout, m)?)?;
    m.add_function(wrap_pyfunction!(list_cells, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("TRACE_HEADER", harness::TRACE_HEADER)?;
    Ok(())
}
