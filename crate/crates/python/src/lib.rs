//! Python bindings: spectra, photon-pair sources, concurrence engines, the
//! compensator optimizer, sweeps and the acceptance checks.

use biphoton_pmd as core;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::Parse(_) | core::Error::InvalidParameter(_) | core::Error::AnalyticRequiresGaussian => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn units(normalized: bool) -> core::UnitSystem {
    if normalized {
        core::UnitSystem::Normalized
    } else {
        core::UnitSystem::Physical
    }
}

/// Filter or pump spectrum with a calibrated rms bandwidth.
#[pyclass(name = "SpectralProfile", frozen, from_py_object)]
#[derive(Clone)]
struct PySpectralProfile {
    inner: core::SpectralProfile,
}

#[pymethods]
impl PySpectralProfile {
    #[staticmethod]
    #[pyo3(signature = (rms_bandwidth, center = 0.0))]
    fn gaussian(rms_bandwidth: f64, center: f64) -> PyResult<Self> {
        let inner = core::SpectralProfile::gaussian(rms_bandwidth, center).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (order, rms_bandwidth, center = 0.0))]
    fn super_gaussian(order: u32, rms_bandwidth: f64, center: f64) -> PyResult<Self> {
        let inner = core::SpectralProfile::super_gaussian(order, rms_bandwidth, center).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Parses `gaussian:B=..`, `supergauss:n=..,B=..` or `table:<csv>`.
    /// Unit suffixes such as `100GHz` are accepted unless `normalized`.
    #[staticmethod]
    #[pyo3(signature = (text, normalized = false))]
    fn parse(text: &str, normalized: bool) -> PyResult<Self> {
        let inner = core::parse_profile(text, &units(normalized)).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn rms_bandwidth(&self) -> f64 {
        self.inner.rms_bandwidth()
    }

    #[getter]
    fn center(&self) -> f64 {
        self.inner.center()
    }

    /// Complex field transmission at angular frequency `omega`.
    fn eval(&self, omega: f64) -> Complex64 {
        self.inner.eval(omega)
    }

    fn measure_rms_bandwidth(&self) -> PyResult<f64> {
        self.inner.measure_rms_bandwidth().map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("SpectralProfile('{}')", self.inner.descriptor())
    }
}

/// Pump plus Alice's and Bob's filters. A pump of `None` is continuous-wave.
#[pyclass(name = "PhotonPairSource", frozen, from_py_object)]
#[derive(Clone)]
struct PySource {
    inner: core::PhotonPairSource,
}

#[pymethods]
impl PySource {
    #[new]
    fn new(pump: Option<PySpectralProfile>, filter_a: PySpectralProfile, filter_b: PySpectralProfile) -> Self {
        let pump = match pump {
            Some(p) => core::PumpSpec::pulsed(p.inner),
            None => core::PumpSpec::cw(),
        };
        Self {
            inner: core::PhotonPairSource::new(pump, filter_a.inner, filter_b.inner),
        }
    }

    /// All-Gaussian source; `b_p = 0` is a CW pump.
    #[staticmethod]
    #[pyo3(signature = (b_p, b_a, b_b, detuning = 0.0))]
    fn gaussian(b_p: f64, b_a: f64, b_b: f64, detuning: f64) -> PyResult<Self> {
        let inner = core::PhotonPairSource::gaussian(b_p, b_a, b_b, detuning).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn super_gaussian(order: u32, b_p: f64, b_a: f64, b_b: f64) -> PyResult<Self> {
        let inner = core::PhotonPairSource::super_gaussian(order, b_p, b_a, b_b).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn is_gaussian(&self) -> bool {
        self.inner.is_gaussian()
    }

    fn __repr__(&self) -> String {
        format!("PhotonPairSource({})", self.inner.describe())
    }
}

#[pyclass(name = "ConcurrenceResult", frozen, get_all)]
struct PyConcurrenceResult {
    concurrence: f64,
    kappa: Complex64,
    method: String,
    est_error: f64,
}

#[pymethods]
impl PyConcurrenceResult {
    fn __repr__(&self) -> String {
        format!(
            "ConcurrenceResult(concurrence={}, method={}, est_error={:e})",
            self.concurrence, self.method, self.est_error
        )
    }
}

#[pyclass(name = "OptimizationResult", frozen, get_all)]
struct PyOptimizationResult {
    tau_b_opt: f64,
    c_opt: f64,
    iterations: usize,
    converged: bool,
}

#[pymethods]
impl PyOptimizationResult {
    fn __repr__(&self) -> String {
        format!(
            "OptimizationResult(tau_b_opt={}, c_opt={}, converged={})",
            self.tau_b_opt, self.c_opt, self.converged
        )
    }
}

fn parse_method(name: &str) -> PyResult<core::Method> {
    Ok(match name {
        "analytic" => core::Method::GaussianAnalytic,
        "freq" => core::Method::FreqQuadrature,
        "time" => core::Method::TimeDomain,
        "cw" => core::Method::CwLimit,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown method '{other}' (analytic, freq, time, cw)"
            )))
        }
    })
}

/// Concurrence engine for one source, with a grid fit for DGDs up to `tau_max`.
#[pyclass(name = "Engine", frozen)]
struct PyEngine {
    inner: core::Engine,
}

#[pymethods]
impl PyEngine {
    #[new]
    #[pyo3(signature = (source, tau_max, method = "freq"))]
    fn new(py: Python<'_>, source: PySource, tau_max: f64, method: &str) -> PyResult<Self> {
        let method = parse_method(method)?;
        let inner = py
            .detach(|| core::Engine::build(&source.inner, method, tau_max))
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn method(&self) -> String {
        self.inner.method().to_string()
    }

    fn evaluate(&self, tau_a: f64, tau_b: f64) -> PyResult<PyConcurrenceResult> {
        use core::ConcurrenceModel;
        let s = core::PmdScenario::new(tau_a, tau_b).map_err(to_py)?;
        let r = self.inner.evaluate(&s).map_err(to_py)?;
        Ok(PyConcurrenceResult {
            concurrence: r.concurrence,
            kappa: r.kappa,
            method: r.method.to_string(),
            est_error: r.est_error,
        })
    }

    #[pyo3(signature = (tau_a, tol = 1e-7, bracket = None))]
    fn optimize(
        &self,
        py: Python<'_>,
        tau_a: f64,
        tol: f64,
        bracket: Option<(f64, f64)>,
    ) -> PyResult<PyOptimizationResult> {
        let r = py
            .detach(|| core::optimize_compensator(&self.inner, tau_a, bracket, tol))
            .map_err(to_py)?;
        Ok(PyOptimizationResult {
            tau_b_opt: r.tau_b_opt,
            c_opt: r.c_opt,
            iterations: r.iterations,
            converged: r.converged,
        })
    }

    /// `[(x, C)]` with `x = tau_b / tau_a` (or `tau_b` when `tau_a = 0`).
    fn sweep_taub(&self, py: Python<'_>, tau_a: f64, tau_b_grid: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
        let curve = py
            .detach(|| core::sweep_taub(&self.inner, tau_a, &tau_b_grid))
            .map_err(to_py)?;
        Ok(curve.points)
    }

    /// `[(omega_a, omega_b, |f|^2)]` on the computation grid, or `None` for
    /// engines without a sampled amplitude.
    fn jsi(&self) -> Option<Vec<(f64, f64, f64)>> {
        self.inner.jsa().map(|j| j.jsi_points().collect())
    }
}

/// Best achievable concurrence versus pump bandwidth, `[(b_p, C_opt)]`.
/// `pump_order` 1 is a Gaussian pump.
#[pyfunction]
#[pyo3(signature = (filter_a, filter_b, tau_a, b_p_grid, pump_order = 1, tol = 1e-7))]
fn sweep_pump_bandwidth(
    py: Python<'_>,
    filter_a: PySpectralProfile,
    filter_b: PySpectralProfile,
    tau_a: f64,
    b_p_grid: Vec<f64>,
    pump_order: u32,
    tol: f64,
) -> PyResult<Vec<(f64, f64)>> {
    let shape = if pump_order == 1 {
        core::PumpShape::Gaussian
    } else {
        core::PumpShape::SuperGaussian { order: pump_order }
    };
    let curve = py
        .detach(|| core::sweep_pump_bandwidth(&filter_a.inner, &filter_b.inner, shape, tau_a, &b_p_grid, tol))
        .map_err(to_py)?;
    Ok(curve.points)
}

/// Closed-form concurrence for Gaussian spectra.
#[pyfunction]
fn concurrence_gaussian(b_p: f64, b_a: f64, b_b: f64, tau_a: f64, tau_b: f64) -> f64 {
    core::concurrence_gaussian(b_p, b_a, b_b, tau_a, tau_b)
}

/// Closed-form `(tau_b_opt, C_opt)` for Gaussian spectra.
#[pyfunction]
fn optimal_dgd_gaussian(b_p: f64, b_a: f64, tau_a: f64) -> (f64, f64) {
    core::optimal_dgd_gaussian(b_p, b_a, tau_a)
}

#[pyfunction]
fn sensitivity_tolerance(b_p: f64, b_a: f64, b_b: f64) -> f64 {
    core::sensitivity_tolerance(b_p, b_a, b_b)
}

/// The 4x4 two-qubit density matrix for overlap `kappa`, as nested lists.
#[pyfunction]
fn density_matrix(kappa: Complex64) -> PyResult<Vec<Vec<Complex64>>> {
    let state = core::density_matrix_from_overlap(kappa).map_err(to_py)?;
    let m = state.matrix();
    Ok((0..4).map(|i| (0..4).map(|j| m[(i, j)]).collect()).collect())
}

/// Wootters concurrence of the density matrix built from `kappa`.
#[pyfunction]
fn wootters_concurrence(kappa: Complex64) -> PyResult<f64> {
    let state = core::density_matrix_from_overlap(kappa).map_err(to_py)?;
    Ok(core::wootters_concurrence(&state))
}

/// `100GHz` to rad/s (ordinary frequency, times 2π).
#[pyfunction]
fn parse_frequency(text: &str) -> PyResult<f64> {
    core::UnitSystem::Physical.frequency(text).map_err(to_py)
}

/// `1ps` to seconds.
#[pyfunction]
fn parse_time(text: &str) -> PyResult<f64> {
    core::UnitSystem::Physical.time(text).map_err(to_py)
}

/// Runs the acceptance checks; returns `[(id, passed, detail)]`.
#[pyfunction]
fn validate(py: Python<'_>) -> Vec<(String, bool, String)> {
    let outcomes = py.detach(|| core::validation::run_all(&Default::default()));
    outcomes
        .into_iter()
        .map(|o| (o.id, o.passed, o.detail))
        .collect()
}

#[pymodule]
#[pyo3(name = "biphoton_pmd")]
fn biphoton_pmd_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpectralProfile>()?;
    m.add_class::<PySource>()?;
    m.add_class::<PyEngine>()?;
    m.add_class::<PyConcurrenceResult>()?;
    m.add_class::<PyOptimizationResult>()?;
    m.add_function(wrap_pyfunction!(sweep_pump_bandwidth, m)?)?;
    m.add_function(wrap_pyfunction!(concurrence_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_dgd_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity_tolerance, m)?)?;
    m.add_function(wrap_pyfunction!(density_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(wootters_concurrence, m)?)?;
    m.add_function(wrap_pyfunction!(parse_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(parse_time, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
