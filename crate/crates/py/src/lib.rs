//! Python bindings for `jdemm`.
//!
//! Parameters cross the boundary as dicts (or JSON strings) with the same
//! schema as the CLI config; results come back as plain dicts.

use jdemm::pricing::PricingSetup;
use jdemm::{DriftMode, ModelParams, OptionKind, Payoff, RiskPremia, SeedSpec};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn err(e: jdemm::Error) -> PyErr {
    match e {
        jdemm::Error::InvalidParams(_)
        | jdemm::Error::NonFinite(_)
        | jdemm::Error::InvalidArgument(_)
        | jdemm::Error::InconsistentOutcome(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = match obj.extract::<String>() {
        Ok(s) => s,
        Err(_) => obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?,
    };
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Model parameters; build with `Model(dict_or_json)`.
#[pyclass(name = "Model", module = "jdemm_py", from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: ModelParams,
}

#[pymethods]
impl PyModel {
    #[new]
    fn new(spec: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Self { inner: from_py(spec)? })
    }

    /// Violated constraints as `"field: constraint"` strings.
    fn validate(&self) -> Vec<String> {
        self.inner.validate().iter().map(ToString::to_string).collect()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau
    }

    /// Copy with `mu` replaced by the no-arbitrage drift.
    fn with_no_arbitrage_mu(&self, premia: &PyPremia) -> PyResult<Self> {
        let inner = jdemm::drift::with_no_arbitrage_mu(&self.inner, &premia.inner).map_err(err)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(mu={}, sigma={}, r={}, tau={}, b_down={}, b_up={})",
            self.inner.mu, self.inner.sigma, self.inner.r, self.inner.tau, self.inner.b_down, self.inner.b_up
        )
    }
}

/// Market prices of risk. All fields default to zero.
#[pyclass(name = "Premia", module = "jdemm_py", from_py_object)]
#[derive(Clone)]
struct PyPremia {
    inner: RiskPremia,
}

#[pymethods]
impl PyPremia {
    #[new]
    #[pyo3(signature = (gamma_d=0.0, eta_1u=0.0, eta_1d=0.0, eta_2u=0.0, eta_2d=0.0))]
    fn new(gamma_d: f64, eta_1u: f64, eta_1d: f64, eta_2u: f64, eta_2d: f64) -> Self {
        Self {
            inner: RiskPremia { gamma_d, eta_1u, eta_1d, eta_2u, eta_2d },
        }
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    #[getter]
    fn gamma_d(&self) -> f64 {
        self.inner.gamma_d
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "Premia(gamma_d={}, eta_1u={}, eta_1d={}, eta_2u={}, eta_2d={})",
            p.gamma_d, p.eta_1u, p.eta_1d, p.eta_2u, p.eta_2d
        )
    }
}

fn drift_mode(name: &str) -> PyResult<DriftMode> {
    match name {
        "no-arbitrage" => Ok(DriftMode::NoArbitrage),
        "params" => Ok(DriftMode::Params),
        other => Err(PyValueError::new_err(format!("unknown drift mode {other:?}"))),
    }
}

fn option_kind(name: &str) -> PyResult<OptionKind> {
    match name {
        "call" => Ok(OptionKind::Call),
        "put" => Ok(OptionKind::Put),
        other => Err(PyValueError::new_err(format!("unknown option kind {other:?}"))),
    }
}

/// Drift that makes the discounted price a martingale, with its decomposition.
#[pyfunction]
fn no_arbitrage_drift<'py>(py: Python<'py>, model: &PyModel, premia: &PyPremia) -> PyResult<Bound<'py, PyAny>> {
    let report = jdemm::no_arbitrage_drift(&model.inner, &premia.inner).map_err(err)?;
    to_py(py, &report)
}

/// Risk-neutral jump probabilities, normalizers and jump laws per region.
#[pyfunction]
fn risk_neutralize<'py>(py: Python<'py>, model: &PyModel, premia: &PyPremia) -> PyResult<Bound<'py, PyAny>> {
    let rn = jdemm::risk_neutralize(&model.inner, &premia.inner).map_err(err)?;
    to_py(py, &rn)
}

/// Simulated price paths as a list of lists (each starting at `s0`).
///
/// `measure` is `"p"` or `"q"`; `drift` (`"params"` or `"no-arbitrage"`)
/// only matters under `"q"`.
#[pyfunction]
#[pyo3(signature = (model, n_paths, n_steps, seed, measure="p", premia=None, s0=100.0, drift="params"))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    model: &PyModel,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
    measure: &str,
    premia: Option<PyPremia>,
    s0: f64,
    drift: &str,
) -> PyResult<Vec<Vec<f64>>> {
    let premia = premia.map(|p| p.inner).unwrap_or_default();
    let params = model.inner;
    let seeds = SeedSpec::new(seed);
    let paths = match measure {
        "p" => py.detach(|| jdemm::simulate_p(&params, s0, n_steps, n_paths, seeds)),
        "q" => {
            let mode = drift_mode(drift)?;
            let rn = jdemm::risk_neutralize(&params, &premia).map_err(err)?;
            py.detach(|| jdemm::simulate_q(&params, &premia, &rn, mode, s0, n_steps, n_paths, seeds))
        }
        other => return Err(PyValueError::new_err(format!("unknown measure {other:?}"))),
    }
    .map_err(err)?;
    Ok(paths.into_iter().map(|p| p.prices).collect())
}

/// Monte Carlo price of a European option under the risk-neutral measure.
#[pyfunction]
#[pyo3(signature = (model, premia, kind, strike, maturity_steps, n_paths, seed, s0=100.0))]
#[allow(clippy::too_many_arguments)]
fn price_european<'py>(
    py: Python<'py>,
    model: &PyModel,
    premia: &PyPremia,
    kind: &str,
    strike: f64,
    maturity_steps: usize,
    n_paths: usize,
    seed: u64,
    s0: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let payoff = Payoff { kind: option_kind(kind)?, strike };
    let setup = PricingSetup {
        s0,
        maturity_steps,
        n_paths,
        seeds: SeedSpec::new(seed),
        drift: DriftMode::NoArbitrage,
    };
    let (params, premia) = (model.inner, premia.inner);
    let result = py
        .detach(|| jdemm::price_european(&params, &premia, payoff, &setup))
        .map_err(err)?;
    to_py(py, &result)
}

#[pyfunction]
fn black_scholes_reference(s0: f64, strike: f64, r: f64, sigma: f64, maturity: f64, kind: &str) -> PyResult<f64> {
    Ok(jdemm::black_scholes_reference(s0, strike, r, sigma, maturity, option_kind(kind)?))
}

/// Solves for `gamma_d` reproducing `target_mu`; other premia held fixed.
#[pyfunction]
fn calibrate_gamma<'py>(
    py: Python<'py>,
    model: &PyModel,
    premia: &PyPremia,
    target_mu: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let cal = jdemm::calibrate_gamma(&model.inner, &premia.inner, target_mu).map_err(err)?;
    to_py(py, &cal)
}

#[pymodule]
fn jdemm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyPremia>()?;
    m.add_function(wrap_pyfunction!(no_arbitrage_drift, m)?)?;
    m.add_function(wrap_pyfunction!(risk_neutralize, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(price_european, m)?)?;
    m.add_function(wrap_pyfunction!(black_scholes_reference, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_gamma, m)?)?;
    Ok(())
}
