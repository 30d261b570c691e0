//! Python bindings for the `tmax` endpoint estimators.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tmax::catalog;
use tmax::classical::{self, KsConfig, NPConfig};
use tmax::cli::{compute_bounds, compute_estimates};
use tmax::diagnostics;
use tmax::evt;
use tmax::output::EstimateRow;
use tmax::simulation::{self, StudyConfig, TruncatedGRParams};
use tmax::{Error, Estimator};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Diverged(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Ordered magnitudes above a completeness threshold.
#[pyclass(name = "MagnitudeSample", frozen)]
struct PySample {
    inner: catalog::MagnitudeSample,
}

#[pymethods]
impl PySample {
    #[new]
    fn new(values: Vec<f64>, t_m: f64) -> PyResult<Self> {
        let inner = catalog::MagnitudeSample::new(values, t_m).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn t_m(&self) -> f64 {
        self.inner.t_m()
    }

    #[getter]
    fn max(&self) -> f64 {
        self.inner.max()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn energies(&self) -> Vec<f64> {
        self.inner.energies()
    }

    fn shifted(&self, c: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.shifted(c).map_err(py_err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!(
            "MagnitudeSample(n={}, t_m={}, max={})",
            self.inner.n(),
            self.inner.t_m(),
            self.inner.max()
        )
    }
}

fn row_dict<'py>(py: Python<'py>, r: &EstimateRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("estimator", &r.estimator)?;
    d.set_item("k", r.k)?;
    d.set_item("estimate", r.estimate)?;
    d.set_item("raw", r.raw)?;
    d.set_item("alpha", r.alpha)?;
    d.set_item("upper_bound", r.upper_bound)?;
    d.set_item("error", if r.error.is_empty() { None } else { Some(&r.error) })?;
    Ok(d)
}

fn parse_estimators(names: Option<Vec<String>>) -> PyResult<Vec<Estimator>> {
    match names {
        None => Ok(Estimator::ALL.to_vec()),
        Some(names) => names
            .iter()
            .map(|n| Estimator::from_id(n).ok_or_else(|| PyValueError::new_err(format!("unknown estimator '{n}'"))))
            .collect(),
    }
}

/// Endpoint estimates as a list of dicts, one per estimator and `k`.
#[pyfunction]
#[pyo3(signature = (sample, estimators=None, k_grid=None, clamp=true))]
fn estimate<'py>(
    py: Python<'py>,
    sample: &PySample,
    estimators: Option<Vec<String>>,
    k_grid: Option<Vec<usize>>,
    clamp: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let estimators = parse_estimators(estimators)?;
    let grid = k_grid.unwrap_or_else(|| (5..sample.inner.n()).collect());
    let rows = py.detach(|| compute_estimates(&sample.inner, &estimators, &grid, clamp));
    rows.iter().map(|r| row_dict(py, r)).collect()
}

/// Truncated GPD, truncated Pareto, N-P-OS and Pisarenko bounds at level `alpha`.
#[pyfunction]
#[pyo3(signature = (sample, k_grid, alpha=0.1, clamp=true))]
fn bounds<'py>(
    py: Python<'py>,
    sample: &PySample,
    k_grid: Vec<usize>,
    alpha: f64,
    clamp: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let rows = py
        .detach(|| compute_bounds(&sample.inner, &k_grid, alpha, clamp))
        .map_err(py_err)?;
    rows.iter().map(|r| row_dict(py, r)).collect()
}

#[pyfunction]
fn fit_truncated_gpd<'py>(py: Python<'py>, sample: &PySample, k: usize) -> PyResult<Bound<'py, PyDict>> {
    let s = &sample.inner;
    let fit = evt::fit_truncated_gpd(s, k).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("k", fit.k)?;
    d.set_item("xi", fit.xi)?;
    d.set_item("sigma", fit.sigma)?;
    d.set_item("tau", fit.tau())?;
    d.set_item("threshold", fit.threshold)?;
    d.set_item("log_likelihood", fit.log_likelihood)?;
    d.set_item("odds", evt::truncation_odds_tgpd(&fit, s).value)?;
    Ok(d)
}

#[pyfunction]
fn fit_truncated_pareto<'py>(py: Python<'py>, sample: &PySample, k: usize) -> PyResult<Bound<'py, PyDict>> {
    let fit = evt::fit_truncated_pareto(&sample.inner.energies(), k).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("k", fit.k)?;
    d.set_item("xi_plus", fit.xi_plus)?;
    d.set_item("r_k", fit.r_k)?;
    d.set_item("hill", fit.hill)?;
    d.set_item("odds", evt::truncation_odds_tpareto(&fit).value)?;
    Ok(d)
}

/// `(statistic, p_value, reject)` of the GPD (`scale="magnitude"`) or Pareto
/// (`scale="energy"`) test for truncation.
#[pyfunction]
#[pyo3(signature = (sample, k, alpha=0.1, scale="energy"))]
fn truncation_test(sample: &PySample, k: usize, alpha: f64, scale: &str) -> PyResult<(f64, f64, bool)> {
    let t = match scale {
        "energy" => evt::test_truncation_pareto(&sample.inner.energies(), k, alpha),
        "magnitude" => evt::test_truncation_gpd(&sample.inner, k, alpha),
        other => return Err(PyValueError::new_err(format!("unknown scale '{other}'"))),
    }
    .map_err(py_err)?;
    Ok((t.statistic, t.p_value, t.reject))
}

/// Kijko-Sellevoll endpoint and rate, `(endpoint, beta)`.
#[pyfunction]
fn kijko_sellevoll(sample: &PySample) -> PyResult<(f64, f64)> {
    let r = classical::ks_endpoint(&sample.inner, &KsConfig::default()).map_err(py_err)?;
    Ok((r.endpoint.estimate, r.beta))
}

#[pyfunction]
fn pisarenko_upper_bound(sample: &PySample, beta: f64, alpha: f64) -> PyResult<f64> {
    Ok(classical::pisarenko_upper_bound(&sample.inner, beta, alpha)
        .map_err(py_err)?
        .value)
}

#[pyfunction]
#[pyo3(signature = (sample, bandwidth=None))]
fn npg_endpoint(sample: &PySample, bandwidth: Option<f64>) -> PyResult<(f64, f64)> {
    let cfg = NPConfig {
        bandwidth,
        ..NPConfig::default()
    };
    let r = classical::npg_endpoint(&sample.inner, &cfg).map_err(py_err)?;
    Ok((r.endpoint.estimate, r.bandwidth))
}

#[pyfunction]
fn exponential_qq(sample: &PySample) -> PyResult<Vec<(f64, f64)>> {
    Ok(diagnostics::exponential_qq(&sample.inner).map_err(py_err)?.points)
}

#[pyfunction]
fn pareto_qq(sample: &PySample) -> PyResult<Vec<(f64, f64)>> {
    Ok(diagnostics::pareto_qq(&sample.inner).map_err(py_err)?.points)
}

/// `(k, threshold, mean_excess)` triples.
#[pyfunction]
fn mean_excess(sample: &PySample) -> PyResult<Vec<(usize, f64, f64)>> {
    let me = diagnostics::mean_excess(&sample.inner).map_err(py_err)?;
    Ok(me.entries.iter().map(|e| (e.k, e.threshold, e.mean_excess)).collect())
}

#[pyfunction]
fn hill(mut values: Vec<f64>, k: usize) -> PyResult<f64> {
    values.sort_by(f64::total_cmp);
    diagnostics::hill(&values, k).map_err(py_err)
}

#[pyfunction]
fn magnitude_to_energy(m: f64) -> f64 {
    catalog::magnitude_to_energy(m)
}

#[pyfunction]
fn energy_to_magnitude(e: f64) -> PyResult<f64> {
    catalog::energy_to_magnitude(e).map_err(py_err)
}

#[pyfunction]
fn smooth_ties(values: Vec<f64>, half_width: f64, seed: u64) -> PyResult<Vec<f64>> {
    catalog::smooth_ties(&values, half_width, seed).map_err(py_err)
}

#[pyfunction]
fn exp_integral_e1(z: f64) -> PyResult<f64> {
    tmax::special::exp_integral_e1(z).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (n, t_upper, beta=2.1203, t_m=1.5, seed=0))]
fn sample_truncated_gr(n: usize, t_upper: f64, beta: f64, t_m: f64, seed: u64) -> PyResult<PySample> {
    let params = TruncatedGRParams::new(beta, t_m, t_upper).map_err(py_err)?;
    Ok(PySample {
        inner: simulation::sample_truncated_gr(&params, n, seed),
    })
}

/// Monte Carlo study at one true endpoint; one dict per estimator and `k`.
#[pyfunction]
#[pyo3(signature = (t_upper, replicates=5000, sample_size=250, k_grid=None, alpha=0.1, seed=20_170_101, beta=2.1203, t_m=1.5))]
#[allow(clippy::too_many_arguments)]
fn run_study<'py>(
    py: Python<'py>,
    t_upper: f64,
    replicates: usize,
    sample_size: usize,
    k_grid: Option<Vec<usize>>,
    alpha: f64,
    seed: u64,
    beta: f64,
    t_m: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = StudyConfig {
        replicates,
        sample_size,
        params: TruncatedGRParams::new(beta, t_m, t_upper).map_err(py_err)?,
        alpha,
        k_grid: k_grid.unwrap_or_else(|| simulation::default_k_grid(sample_size)),
        master_seed: seed,
        ..StudyConfig::paper_defaults(t_upper).map_err(py_err)?
    };
    let report = py.detach(|| simulation::run_study(&cfg)).map_err(py_err)?;
    report
        .metrics
        .iter()
        .map(|m| {
            let d = PyDict::new(py);
            d.set_item("estimator", m.estimator.id())?;
            d.set_item("k", m.k)?;
            d.set_item("relative_mean", m.relative_mean)?;
            d.set_item("relative_mse", m.relative_mse)?;
            d.set_item("coverage", m.coverage)?;
            d.set_item("used", m.used)?;
            d.set_item("failure_count", m.failure_count)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "tmax")]
fn tmax_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySample>()?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(fit_truncated_gpd, m)?)?;
    m.add_function(wrap_pyfunction!(fit_truncated_pareto, m)?)?;
    m.add_function(wrap_pyfunction!(truncation_test, m)?)?;
    m.add_function(wrap_pyfunction!(kijko_sellevoll, m)?)?;
    m.add_function(wrap_pyfunction!(pisarenko_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(npg_endpoint, m)?)?;
    m.add_function(wrap_pyfunction!(exponential_qq, m)?)?;
    m.add_function(wrap_pyfunction!(pareto_qq, m)?)?;
    m.add_function(wrap_pyfunction!(mean_excess, m)?)?;
    m.add_function(wrap_pyfunction!(hill, m)?)?;
    m.add_function(wrap_pyfunction!(magnitude_to_energy, m)?)?;
    m.add_function(wrap_pyfunction!(energy_to_magnitude, m)?)?;
    m.add_function(wrap_pyfunction!(smooth_ties, m)?)?;
    m.add_function(wrap_pyfunction!(exp_integral_e1, m)?)?;
    m.add_function(wrap_pyfunction!(sample_truncated_gr, m)?)?;
    m.add_function(wrap_pyfunction!(run_study, m)?)?;
    Ok(())
}
