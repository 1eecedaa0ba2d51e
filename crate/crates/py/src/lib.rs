//! Python bindings: model parameters, the series reference, plateau fitting
//! and full dispersion runs.

use ipeps_dispersion::dispersion::{
    self, CellPolicy, DispersionCurve, EvolutionTrace, FitOptions, FitResult,
};
use ipeps_dispersion::ipeps::EvolutionParams;
use ipeps_dispersion::lattice::{self, Momentum, SymmetryPoint, UnitCell};
use ipeps_dispersion::model::{Phase, TfimParams};
use ipeps_dispersion::series::{self, SeriesSpec};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_phase(s: &str) -> PyResult<Phase> {
    match s {
        "ferromagnetic" | "ferro" => Ok(Phase::Ferromagnetic),
        "paramagnetic" | "para" => Ok(Phase::Paramagnetic),
        other => Err(PyValueError::new_err(format!("unknown phase {other:?}"))),
    }
}

fn phase_str(p: Phase) -> &'static str {
    match p {
        Phase::Ferromagnetic => "ferromagnetic",
        Phase::Paramagnetic => "paramagnetic",
    }
}

/// A momentum given as a high-symmetry label or a sequence of radians.
fn momentum_arg(obj: &Bound<'_, PyAny>, dimensionality: usize) -> PyResult<Momentum> {
    let k = if let Ok(label) = obj.extract::<String>() {
        SymmetryPoint::parse(&label)
            .and_then(|p| p.momentum(dimensionality))
            .map_err(value_err)?
    } else {
        Momentum::new(obj.extract::<Vec<f64>>()?)
    };
    if k.dimensionality() != dimensionality {
        return Err(PyValueError::new_err(format!(
            "momentum has {} components, expected {dimensionality}",
            k.dimensionality()
        )));
    }
    Ok(k)
}

fn cell_arg(obj: &Bound<'_, PyAny>) -> PyResult<CellPolicy> {
    if let Ok(name) = obj.extract::<String>() {
        return match name.as_str() {
            "minimal" => Ok(CellPolicy::Minimal),
            "common" => Ok(CellPolicy::Common),
            other => Err(PyValueError::new_err(format!("unknown cell policy {other:?}"))),
        };
    }
    let dims = obj.extract::<Vec<usize>>()?;
    Ok(CellPolicy::Fixed(UnitCell::new(dims).map_err(value_err)?))
}

#[pyclass(name = "TfimParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyTfimParams {
    inner: TfimParams,
}

#[pymethods]
impl PyTfimParams {
    #[new]
    #[pyo3(signature = (j, g, dimensionality = 2))]
    fn new(j: f64, g: f64, dimensionality: usize) -> PyResult<Self> {
        let inner = TfimParams::new(j, g, dimensionality).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn j(&self) -> f64 {
        self.inner.j
    }

    #[getter]
    fn g(&self) -> f64 {
        self.inner.g
    }

    #[getter]
    fn dimensionality(&self) -> usize {
        self.inner.dimensionality
    }

    #[getter]
    fn phase(&self) -> &'static str {
        phase_str(self.inner.phase())
    }

    #[getter]
    fn energy_unit(&self) -> &'static str {
        self.inner.energy_unit()
    }

    fn __repr__(&self) -> String {
        format!(
            "TfimParams(j={}, g={}, dimensionality={})",
            self.inner.j, self.inner.g, self.inner.dimensionality
        )
    }
}

#[pyclass(name = "EvolutionParams", from_py_object)]
#[derive(Clone)]
struct PyEvolutionParams {
    inner: EvolutionParams,
}

#[pymethods]
impl PyEvolutionParams {
    #[new]
    #[pyo3(signature = (dtau = 0.01, max_steps = 4000, d_max = 4, seed = 7, floor = 1e-12))]
    fn new(dtau: f64, max_steps: usize, d_max: usize, seed: u64, floor: f64) -> PyResult<Self> {
        let inner = EvolutionParams {
            dtau,
            max_steps,
            d_max,
            seed,
            floor,
        };
        inner.validate().map_err(PyValueError::new_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dtau(&self) -> f64 {
        self.inner.dtau
    }

    #[getter]
    fn max_steps(&self) -> usize {
        self.inner.max_steps
    }

    #[getter]
    fn d_max(&self) -> usize {
        self.inner.d_max
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn floor(&self) -> f64 {
        self.inner.floor
    }

    fn __repr__(&self) -> String {
        let e = &self.inner;
        format!(
            "EvolutionParams(dtau={}, max_steps={}, d_max={}, seed={}, floor={})",
            e.dtau, e.max_steps, e.d_max, e.seed, e.floor
        )
    }
}

#[pyclass(name = "FitResult", frozen)]
struct PyFitResult {
    inner: FitResult,
}

#[pymethods]
impl PyFitResult {
    #[getter]
    fn k(&self) -> Vec<f64> {
        self.inner.k.components.clone()
    }

    #[getter]
    fn label(&self) -> Option<&'static str> {
        self.inner.k.label.map(SymmetryPoint::as_str)
    }

    #[getter]
    fn delta_k(&self) -> f64 {
        self.inner.delta_k
    }

    #[getter]
    fn intercept(&self) -> f64 {
        self.inner.intercept
    }

    #[getter]
    fn window(&self) -> (f64, f64) {
        self.inner.window
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn slope_std(&self) -> f64 {
        self.inner.slope_std
    }

    #[getter]
    fn plateau_ok(&self) -> bool {
        self.inner.plateau_ok
    }

    fn __repr__(&self) -> String {
        format!(
            "FitResult(k={}, delta_k={}, slope_std={}, plateau_ok={})",
            self.inner.k.label_str(),
            self.inner.delta_k,
            self.inner.slope_std,
            if self.inner.plateau_ok { "True" } else { "False" }
        )
    }
}

#[pyclass(name = "Trace", frozen)]
struct PyTrace {
    inner: EvolutionTrace,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn k(&self) -> Vec<f64> {
        self.inner.k.components.clone()
    }

    #[getter]
    fn tau(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.0).collect()
    }

    #[getter]
    fn c(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.1).collect()
    }

    #[getter]
    fn truncated_at(&self) -> Option<f64> {
        self.inner.truncated_at
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "DispersionCurve", frozen)]
struct PyDispersionCurve {
    inner: DispersionCurve,
}

#[pymethods]
impl PyDispersionCurve {
    #[getter]
    fn params(&self) -> PyTfimParams {
        PyTfimParams {
            inner: self.inner.params,
        }
    }

    #[getter]
    fn d_max(&self) -> usize {
        self.inner.d_max
    }

    #[getter]
    fn dtau(&self) -> f64 {
        self.inner.dtau
    }

    #[getter]
    fn unit(&self) -> &str {
        &self.inner.unit
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.provenance.seed
    }

    #[getter]
    fn points(&self) -> Vec<PyFitResult> {
        self.inner
            .points
            .iter()
            .map(|p| PyFitResult { inner: p.clone() })
            .collect()
    }

    /// `(k, reason)` for every point that could not be fitted.
    #[getter]
    fn failures(&self) -> Vec<(Vec<f64>, String)> {
        self.inner
            .failures
            .iter()
            .map(|f| (f.k.components.clone(), f.reason.clone()))
            .collect()
    }

    fn point(&self, k: &Bound<'_, PyAny>) -> PyResult<Option<PyFitResult>> {
        let k = momentum_arg(k, self.inner.params.dimensionality)?;
        Ok(self.inner.point(&k).map(|p| PyFitResult { inner: p.clone() }))
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(runtime_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = DispersionCurve::from_json(text).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.points.len()
    }
}

/// Momentum of a high-symmetry label ("G", "X", "M", "S", "R").
#[pyfunction]
#[pyo3(signature = (label, dimensionality = 2))]
fn symmetry_point(label: &str, dimensionality: usize) -> PyResult<Vec<f64>> {
    let k = SymmetryPoint::parse(label)
        .and_then(|p| p.momentum(dimensionality))
        .map_err(value_err)?;
    Ok(k.components)
}

/// Labels and momenta of the high-symmetry path.
#[pyfunction]
#[pyo3(signature = (dimensionality = 2))]
fn high_symmetry_path(dimensionality: usize) -> PyResult<Vec<(String, Vec<f64>)>> {
    let path = lattice::high_symmetry_path(dimensionality).map_err(value_err)?;
    Ok(path
        .into_iter()
        .map(|k| (k.label_str().to_string(), k.components))
        .collect())
}

/// Series gap at `k` in units of g (paramagnet, coupling J/g) or J
/// (ferromagnet, coupling g/J).
#[pyfunction]
#[pyo3(signature = (phase, coupling, k, dimensionality = 2))]
fn series_delta(
    phase: &str,
    coupling: f64,
    k: &Bound<'_, PyAny>,
    dimensionality: usize,
) -> PyResult<f64> {
    let spec = SeriesSpec::new(dimensionality, parse_phase(phase)?, coupling).map_err(value_err)?;
    let k = momentum_arg(k, dimensionality)?;
    series::series_delta(&spec, &k).map_err(value_err)
}

/// Whether the truncated series is a trustworthy reference at `coupling`.
#[pyfunction]
#[pyo3(signature = (phase, coupling, dimensionality = 2))]
fn series_within_validity(phase: &str, coupling: f64, dimensionality: usize) -> PyResult<bool> {
    let spec = SeriesSpec::new(dimensionality, parse_phase(phase)?, coupling).map_err(value_err)?;
    Ok(spec.within_validity())
}

/// Detects the plateau of `dC/dτ` in a sampled trace and fits its slope.
#[pyfunction]
#[pyo3(signature = (tau, c, rel_tol = 1e-3, min_frac = 0.2))]
fn fit_trace(tau: Vec<f64>, c: Vec<f64>, rel_tol: f64, min_frac: f64) -> PyResult<PyFitResult> {
    if tau.len() != c.len() || tau.len() < 2 {
        return Err(PyValueError::new_err(
            "tau and c need equal lengths of at least two",
        ));
    }
    let dtau = tau[1] - tau[0];
    let samples = tau.into_iter().zip(c).collect();
    let trace = EvolutionTrace::from_samples(Momentum::new(vec![0.0, 0.0]), dtau, samples);
    let fit = FitOptions { rel_tol, min_frac };
    let inner = dispersion::fit_trace(&trace, &fit).map_err(runtime_err)?;
    Ok(PyFitResult { inner })
}

/// Runs imaginary-time evolution for every momentum and fits each trace.
///
/// Momenta are labels or sequences of radians. `cell` is "minimal",
/// "common" or explicit cell dimensions. Returns the curve, or
/// `(curve, traces)` when `traces` is true.
#[pyfunction]
#[pyo3(signature = (params, momenta, evolution = None, cell = None, rel_tol = 1e-3, min_frac = 0.2, traces = false))]
#[allow(clippy::too_many_arguments)]
fn compute_curve(
    py: Python<'_>,
    params: &PyTfimParams,
    momenta: Vec<Bound<'_, PyAny>>,
    evolution: Option<PyEvolutionParams>,
    cell: Option<Bound<'_, PyAny>>,
    rel_tol: f64,
    min_frac: f64,
    traces: bool,
) -> PyResult<Py<PyAny>> {
    let d = params.inner.dimensionality;
    let ks = momenta
        .iter()
        .map(|k| momentum_arg(k, d))
        .collect::<PyResult<Vec<_>>>()?;
    let policy = match cell {
        Some(c) => cell_arg(&c)?,
        None => CellPolicy::Minimal,
    };
    let ev = evolution.map(|e| e.inner).unwrap_or_default();
    let fit = FitOptions { rel_tol, min_frac };
    let p = params.inner;
    let run = py
        .detach(|| dispersion::compute_curve_with_traces(&p, &ev, &ks, &policy, &fit))
        .map_err(value_err)?;
    let curve = PyDispersionCurve { inner: run.curve };
    if traces {
        let traces: Vec<PyTrace> = run.traces.into_iter().map(|t| PyTrace { inner: t }).collect();
        Ok((curve, traces).into_pyobject(py)?.into_any().unbind())
    } else {
        Ok(Py::new(py, curve)?.into_any())
    }
}

#[pymodule(name = "ipeps_dispersion")]
fn python_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTfimParams>()?;
    m.add_class::<PyEvolutionParams>()?;
    m.add_class::<PyFitResult>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyDispersionCurve>()?;
    m.add_function(wrap_pyfunction!(symmetry_point, m)?)?;
    m.add_function(wrap_pyfunction!(high_symmetry_path, m)?)?;
    m.add_function(wrap_pyfunction!(series_delta, m)?)?;
    m.add_function(wrap_pyfunction!(series_within_validity, m)?)?;
    m.add_function(wrap_pyfunction!(fit_trace, m)?)?;
    m.add_function(wrap_pyfunction!(compute_curve, m)?)?;
    Ok(())
}
