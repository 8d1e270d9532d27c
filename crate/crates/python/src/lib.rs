//! Python bindings. Matrices are passed as nested lists (one inner list per
//! state) or as `StateMatrix` objects; column indices are 0-based.

use ::conirep as core;
use core::{Error, EvalConfig, EvaluationResult, Vector};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(conirep, BudgetExceededError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::BudgetExceeded { .. } => BudgetExceededError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "StateMatrix", module = "conirep", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyStateMatrix {
    inner: core::StateMatrix,
}

#[pymethods]
impl PyStateMatrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = core::StateMatrix::from_rows(&rows).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_csv(path: std::path::PathBuf) -> PyResult<Self> {
        let inner = core::io::read_matrix_csv(&path).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_csv(&self) -> String {
        core::io::format_matrix_csv(&self.inner)
    }

    #[getter]
    fn states(&self) -> usize {
        self.inner.states()
    }

    #[getter]
    fn neurons(&self) -> usize {
        self.inner.neurons()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    fn __repr__(&self) -> String {
        format!("StateMatrix({:?})", self.inner.rows())
    }
}

#[derive(FromPyObject)]
enum MatrixArg {
    Matrix(PyStateMatrix),
    Rows(Vec<Vec<f64>>),
}

impl MatrixArg {
    fn into_matrix(self) -> PyResult<core::StateMatrix> {
        match self {
            MatrixArg::Matrix(m) => Ok(m.inner),
            MatrixArg::Rows(r) => core::StateMatrix::from_rows(&r).map_err(to_py),
        }
    }
}

#[pyclass(name = "Region", module = "conirep", frozen, get_all)]
pub struct PyRegion {
    element_columns: Vec<usize>,
    dimension: usize,
    volume: f64,
    integral: f64,
    vertex_count: usize,
    simplex_count: usize,
}

impl From<&core::RegionRecord> for PyRegion {
    fn from(r: &core::RegionRecord) -> Self {
        Self {
            element_columns: r.columns.clone(),
            dimension: r.dimension,
            volume: r.volume,
            integral: r.integral,
            vertex_count: r.vertex_count,
            simplex_count: r.simplex_count,
        }
    }
}

#[pymethods]
impl PyRegion {
    fn __repr__(&self) -> String {
        format!(
            "Region(element_columns={:?}, dimension={}, volume={}, integral={})",
            self.element_columns, self.dimension, self.volume, self.integral
        )
    }
}

#[pyclass(name = "Evaluation", module = "conirep", frozen)]
pub struct PyEvaluation {
    inner: EvaluationResult,
}

#[pymethods]
impl PyEvaluation {
    #[getter]
    fn ir(&self) -> f64 {
        self.inner.ir
    }

    #[getter]
    fn irn(&self) -> f64 {
        self.inner.irn
    }

    #[getter]
    fn output_volume(&self) -> f64 {
        self.inner.output_volume
    }

    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.as_str()
    }

    #[getter]
    fn extreme_ray_columns(&self) -> Vec<usize> {
        self.inner.extreme_ray_columns.clone()
    }

    #[getter]
    fn redundant_columns(&self) -> Vec<usize> {
        self.inner.redundant_columns.clone()
    }

    #[getter]
    fn zero_columns(&self) -> Vec<usize> {
        self.inner.zero_columns.clone()
    }

    #[getter]
    fn regions(&self) -> Vec<PyRegion> {
        self.inner.regions.iter().map(PyRegion::from).collect()
    }

    #[getter]
    fn diagnostics(&self) -> Vec<String> {
        self.inner.diagnostics.clone()
    }

    /// The JSON report written by `conirep evaluate`.
    fn to_json(&self) -> String {
        core::report::EvaluationReport::from(&self.inner).to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "Evaluation(ir={}, irn={}, output_volume={}, method='{}')",
            self.inner.ir,
            self.inner.irn,
            self.inner.output_volume,
            self.inner.method.as_str()
        )
    }
}

fn config(tol_geom: Option<f64>, budget_samples: u128) -> EvalConfig {
    let mut cfg = EvalConfig {
        sample_budget: budget_samples,
        ..EvalConfig::default()
    };
    if let Some(t) = tol_geom {
        cfg.tol.geom = t;
    }
    cfg
}

/// Exact representation error. The GIL is released while computing.
#[pyfunction]
#[pyo3(signature = (matrix, *, tol_geom=None, budget_samples=10_000_000))]
fn evaluate(
    py: Python<'_>,
    matrix: MatrixArg,
    tol_geom: Option<f64>,
    budget_samples: u128,
) -> PyResult<PyEvaluation> {
    let c = matrix.into_matrix()?;
    let cfg = config(tol_geom, budget_samples);
    let inner = py.detach(|| core::evaluate(&c, &cfg)).map_err(to_py)?;
    Ok(PyEvaluation { inner })
}

/// Per-element regions, including empty ones.
#[pyfunction]
#[pyo3(signature = (matrix, *, tol_geom=None))]
fn region_report(
    py: Python<'_>,
    matrix: MatrixArg,
    tol_geom: Option<f64>,
) -> PyResult<Vec<PyRegion>> {
    let c = matrix.into_matrix()?;
    let cfg = config(tol_geom, 10_000_000);
    let records = py.detach(|| core::region_report(&c, &cfg)).map_err(to_py)?;
    Ok(records.iter().map(PyRegion::from).collect())
}

/// Midpoint-rule estimate with `n` samples per axis; returns `(ir_num, irn_num)`.
#[pyfunction]
#[pyo3(signature = (matrix, n, *, budget_samples=10_000_000))]
fn ir_num(
    py: Python<'_>,
    matrix: MatrixArg,
    n: usize,
    budget_samples: u128,
) -> PyResult<(f64, f64)> {
    let c = matrix.into_matrix()?;
    let q = py
        .detach(|| core::ir_num(&c, n, budget_samples))
        .map_err(to_py)?;
    Ok((q.ir_num, q.irn_num))
}

/// Nonnegative least squares `min ||C w - target||`, `w >= 0`; returns
/// `(weights, squared_residual)`.
#[pyfunction]
fn nnls(matrix: MatrixArg, target: Vec<f64>) -> PyResult<(Vec<f64>, f64)> {
    let c = matrix.into_matrix()?;
    let b = Vector::from_vec(target);
    let w = core::nnls(&c, &b).map_err(to_py)?;
    let r = core::residual_sq(&c, &w, &b).map_err(to_py)?;
    Ok((w.0, r))
}

/// Count spikes per slot; `events` holds `(neuron_id, time)` pairs with
/// 1-based neuron ids. Returns the matrix and the number of spikes past
/// the last slot.
#[pyfunction]
fn bin_spikes(
    events: Vec<(usize, f64)>,
    neurons: usize,
    duration: f64,
    slot_length: f64,
    states: usize,
) -> PyResult<(PyStateMatrix, usize)> {
    let events = events
        .into_iter()
        .map(|(neuron, time)| core::encode::SpikeEvent { neuron, time })
        .collect();
    let train = core::SpikeTrain::new(neurons, duration, events).map_err(to_py)?;
    let cfg = core::SlotConfig::new(slot_length, states).map_err(to_py)?;
    let encoded = core::bin_spikes(&train, &cfg).map_err(to_py)?;
    Ok((
        PyStateMatrix {
            inner: encoded.matrix,
        },
        encoded.ignored_events,
    ))
}

#[pymodule]
#[pyo3(name = "conirep")]
fn conirep_python(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStateMatrix>()?;
    m.add_class::<PyEvaluation>()?;
    m.add_class::<PyRegion>()?;
    m.add(
        "BudgetExceededError",
        m.py().get_type::<BudgetExceededError>(),
    )?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(region_report, m)?)?;
    m.add_function(wrap_pyfunction!(ir_num, m)?)?;
    m.add_function(wrap_pyfunction!(nnls, m)?)?;
    m.add_function(wrap_pyfunction!(bin_spikes, m)?)?;
    Ok(())
}
