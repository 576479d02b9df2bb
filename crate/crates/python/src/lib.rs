//! Python bindings: `import pybosonsim`.

use std::collections::BTreeMap;

use bosonsim::bounds::{self, NoiseAxis, PointErrorForm};
use bosonsim::costmodel::{self, PointCostModel};
use bosonsim::interferometer;
use bosonsim::oracle;
use bosonsim::sampler::{sample_batch_with_threads, SamplerConfig};
use bosonsim::types::standard_input;
use bosonsim::{stats, CMatrix, FockVector, NoiseModel, OutcomeDistribution, TruncationLevel};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyTuple};

fn py_err(e: bosonsim::Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

type Table = BTreeMap<Vec<usize>, f64>;

/// Outcome table as a dict keyed by occupation tuples.
fn to_dict(py: Python<'_>, dist: OutcomeDistribution) -> PyResult<Bound<'_, PyDict>> {
    let out = PyDict::new(py);
    for (k, p) in dist.iter() {
        out.set_item(PyTuple::new(py, k.occupations())?, p)?;
    }
    Ok(out)
}

fn from_table(table: Table) -> OutcomeDistribution {
    table.into_iter().map(|(k, p)| (FockVector::new(k), p)).collect()
}

fn to_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// An m-mode unitary.
#[pyclass(name = "Interferometer", module = "pybosonsim", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyInterferometer(bosonsim::Interferometer);

#[pymethods]
impl PyInterferometer {
    /// Builds from a square list of complex rows; rejects non-unitary input.
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        bosonsim::Interferometer::new(to_matrix(rows)?).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn haar(m: usize, seed: u64) -> PyResult<Self> {
        interferometer::haar_random(m, seed).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn fourier(m: usize) -> PyResult<Self> {
        interferometer::fourier(m).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        interferometer::from_json(text).map(Self).map_err(py_err)
    }

    fn to_json(&self) -> String {
        interferometer::to_json(&self.0)
    }

    #[getter]
    fn modes(&self) -> usize {
        self.0.modes()
    }

    fn rows(&self) -> Vec<Vec<Complex64>> {
        let m = self.0.modes();
        (0..m).map(|i| (0..m).map(|j| self.0.amplitude(i, j)).collect()).collect()
    }

    fn __repr__(&self) -> String {
        format!("Interferometer(modes={})", self.0.modes())
    }
}

/// Permanent of a square complex matrix (Ryser).
#[pyfunction]
fn permanent(rows: Vec<Vec<Complex64>>) -> PyResult<Complex64> {
    bosonsim::permanent_ryser(&to_matrix(rows)?).map_err(py_err)
}

/// Exact table of `photons` indistinguishable photons in modes 0..n.
#[pyfunction]
fn ideal_distribution<'py>(py: Python<'py>, u: &PyInterferometer, photons: usize) -> PyResult<Bound<'py, PyDict>> {
    let s = standard_input(photons, u.0.modes()).map_err(py_err)?;
    to_dict(py, oracle::ideal_distribution(&u.0, &s).map_err(py_err)?)
}

/// Exact table with uniform pairwise overlap `x`.
#[pyfunction]
fn gram_distribution<'py>(py: Python<'py>, u: &PyInterferometer, photons: usize, x: f64) -> PyResult<Bound<'py, PyDict>> {
    let s = standard_input(photons, u.0.modes()).map_err(py_err)?;
    let gram = oracle::uniform_gram(photons, x).map_err(py_err)?;
    to_dict(py, oracle::gram_distribution(&u.0, &s, &gram).map_err(py_err)?)
}

/// Exact table of the truncated model; `k` defaults to `photons`.
#[pyfunction]
#[pyo3(signature = (u, photons, x=1.0, eta=1.0, k=None))]
fn mixture_distribution<'py>(
    py: Python<'py>,
    u: &PyInterferometer,
    photons: usize,
    x: f64,
    eta: f64,
    k: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let noise = NoiseModel::new(x, eta).map_err(py_err)?;
    let k = TruncationLevel(k.unwrap_or(photons));
    to_dict(py, oracle::lossy_mixture_distribution(&u.0, photons, noise, k).map_err(py_err)?)
}

/// Seeded sampler of the truncated model.
#[pyclass(name = "Sampler", module = "pybosonsim", frozen)]
struct PySampler(SamplerConfig);

#[pymethods]
impl PySampler {
    #[new]
    #[pyo3(signature = (u, photons, x=1.0, eta=1.0, k=None, seed=0))]
    fn new(u: &PyInterferometer, photons: usize, x: f64, eta: f64, k: Option<usize>, seed: u64) -> PyResult<Self> {
        let noise = NoiseModel::new(x, eta).map_err(py_err)?;
        SamplerConfig::new(u.0.clone(), photons, noise, TruncationLevel(k.unwrap_or(photons)), seed)
            .map(Self)
            .map_err(py_err)
    }

    /// `count` occupation lists; independent of `threads`.
    #[pyo3(signature = (count, threads=0))]
    fn sample(&self, py: Python<'_>, count: usize, threads: usize) -> PyResult<Vec<Vec<usize>>> {
        let samples = py.detach(|| sample_batch_with_threads(&self.0, count, threads)).map_err(py_err)?;
        Ok(samples.into_iter().map(|s| s.occupations().to_vec()).collect())
    }
}

#[pyfunction]
fn total_variation(p: Table, q: Table) -> f64 {
    stats::total_variation(&from_table(p), &from_table(q))
}

#[pyfunction]
fn binomial_tail(n: usize, k: usize, p: f64) -> f64 {
    bounds::binomial_tail(n, k, p)
}

#[pyfunction]
fn min_k_for_error(n: usize, p: f64, epsilon: f64) -> usize {
    bounds::min_k_for_error(n, p, epsilon)
}

#[pyfunction]
fn max_noise_state(n: usize, k: usize, epsilon: f64) -> PyResult<f64> {
    bounds::max_noise_state(n, k, epsilon).map_err(py_err)
}

fn axis(name: &str) -> PyResult<NoiseAxis> {
    match name {
        "x" | "distinguishability" => Ok(NoiseAxis::Distinguishability),
        "eta" | "loss" => Ok(NoiseAxis::Loss),
        _ => Err(PyValueError::new_err(format!("unknown axis {name:?}; use 'x' or 'eta'"))),
    }
}

#[pyfunction]
#[pyo3(signature = (n, k, epsilon, axis_name="x"))]
fn max_noise_point(n: usize, k: usize, epsilon: f64, axis_name: &str) -> PyResult<f64> {
    bounds::max_noise_point(n, k, epsilon, axis(axis_name)?).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (n, k, x, eta=1.0, asymptotic=false))]
fn point_truncation_error(n: usize, k: usize, x: f64, eta: f64, asymptotic: bool) -> PyResult<f64> {
    let form = if asymptotic { PointErrorForm::Asymptotic } else { PointErrorForm::FiniteN };
    bounds::point_truncation_error(n, k, x, eta, form).map_err(py_err)
}

#[pyfunction]
fn state_truncation_cost(n: usize, m: usize, k: usize) -> PyResult<f64> {
    costmodel::state_truncation_cost(n, m, k).map_err(py_err)
}

#[pyfunction]
fn point_truncation_cost(n: usize, k: usize) -> PyResult<f64> {
    costmodel::point_truncation_cost(n, k).map_err(py_err)
}

/// Photon number past which point truncation stays cheaper, or None.
#[pyfunction]
#[pyo3(signature = (x, eta, epsilon=0.1, n_min=2, n_max=600))]
fn crossover_n(x: f64, eta: f64, epsilon: f64, n_min: usize, n_max: usize) -> PyResult<Option<usize>> {
    costmodel::crossover_n(x, eta, epsilon, n_min..=n_max, &PointCostModel::default()).map_err(py_err)
}

#[pymodule]
pub fn pybosonsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInterferometer>()?;
    m.add_class::<PySampler>()?;
    m.add_function(wrap_pyfunction!(permanent, m)?)?;
    m.add_function(wrap_pyfunction!(ideal_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(gram_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(mixture_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(total_variation, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_tail, m)?)?;
    m.add_function(wrap_pyfunction!(min_k_for_error, m)?)?;
    m.add_function(wrap_pyfunction!(max_noise_state, m)?)?;
    m.add_function(wrap_pyfunction!(max_noise_point, m)?)?;
    m.add_function(wrap_pyfunction!(point_truncation_error, m)?)?;
    m.add_function(wrap_pyfunction!(state_truncation_cost, m)?)?;
    m.add_function(wrap_pyfunction!(point_truncation_cost, m)?)?;
    m.add_function(wrap_pyfunction!(crossover_n, m)?)?;
    Ok(())
}
