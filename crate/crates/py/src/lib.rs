//! Python bindings: row-stochastic weight matrices, consensus iteration,
//! ergodic analysis, and the locally-stopped simulator.
//!
//! States cross the boundary as plain lists: a flat `list[float]` for scalar
//! node states, or `list[list[float]]` for vector-valued ones. Functions
//! return the same shape they were given.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use consensus_halt::{
    self as core, all_halt_latency, DetectorKind, NetworkState, SimConfig, StopThreshold,
    ThresholdKind, WeightMatrix,
};

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Accepts either a flat scalar state or a nested vector state.
#[derive(FromPyObject)]
enum StateInput {
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
}

impl StateInput {
    fn into_state(self) -> PyResult<NetworkState> {
        match self {
            StateInput::Flat(v) => NetworkState::from_scalars(&v).map_err(err),
            StateInput::Nested(v) => NetworkState::new(v).map_err(err),
        }
    }
}

fn state_out(py: Python<'_>, s: &NetworkState) -> PyResult<Py<PyAny>> {
    if s.state_dim() == 1 {
        let flat: Vec<f64> = s.nodes().iter().map(|r| r[0]).collect();
        Ok(flat.into_pyobject(py)?.into_any().unbind())
    } else {
        Ok(s.nodes().to_vec().into_pyobject(py)?.into_any().unbind())
    }
}

fn parse_detector(name: &str) -> PyResult<DetectorKind> {
    match name {
        "yz" => Ok(DetectorKind::Yz),
        "min-rounds" | "min_rounds" => Ok(DetectorKind::MinRounds),
        other => Err(PyValueError::new_err(format!(
            "unknown detector {other:?}; expected \"yz\" or \"min-rounds\""
        ))),
    }
}

fn parse_threshold(name: &str) -> PyResult<ThresholdKind> {
    match name {
        "diameter" => Ok(ThresholdKind::Diameter),
        "size" => Ok(ThresholdKind::Size),
        other => Err(PyValueError::new_err(format!(
            "unknown threshold {other:?}; expected \"diameter\" or \"size\""
        ))),
    }
}

/// Row-stochastic interaction matrix with positive diagonal.
#[pyclass(
    frozen,
    skip_from_py_object,
    name = "WeightMatrix",
    module = "consensus_halt_py"
)]
#[derive(Clone)]
struct PyWeightMatrix {
    inner: WeightMatrix,
}

#[pymethods]
impl PyWeightMatrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyWeightMatrix {
            inner: WeightMatrix::from_rows(&rows).map_err(err)?,
        })
    }

    /// Number of nodes.
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.n();
        if i >= n || j >= n {
            return Err(PyValueError::new_err(format!(
                "index ({i}, {j}) out of range for a {n}-node matrix"
            )));
        }
        Ok(self.inner.get(i, j))
    }

    /// The matrix as a nested list (renormalized rows).
    fn rows(&self) -> Vec<Vec<f64>> {
        let n = self.inner.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.inner.get(i, j)).collect())
            .collect()
    }

    /// Longest shortest path of the interaction graph.
    fn diameter(&self) -> PyResult<usize> {
        self.inner.graph().diameter().map_err(err)
    }

    #[getter]
    fn strongly_connected(&self) -> bool {
        self.inner.graph().is_strongly_connected()
    }

    fn __repr__(&self) -> String {
        format!("WeightMatrix(n={})", self.inner.n())
    }
}

/// One synchronous consensus slot: x <- A x.
#[pyfunction]
fn step(py: Python<'_>, w: &PyWeightMatrix, x: StateInput) -> PyResult<Py<PyAny>> {
    let s = x.into_state()?;
    state_out(py, &core::consensus_step(&w.inner, &s).map_err(err)?)
}

/// The state after `k` consensus slots.
#[pyfunction]
fn iterate(py: Python<'_>, w: &PyWeightMatrix, x: StateInput, k: usize) -> PyResult<Py<PyAny>> {
    let mut s = x.into_state()?;
    for _ in 0..k {
        s = core::consensus_step(&w.inner, &s).map_err(err)?;
    }
    state_out(py, &s)
}

/// One slot of the stubborn-anchored update with coupling `omega` and
/// anchor `x0`.
#[pyfunction]
fn fj_step(
    py: Python<'_>,
    w: &PyWeightMatrix,
    x: StateInput,
    omega: Vec<f64>,
    x0: StateInput,
) -> PyResult<Py<PyAny>> {
    let s = x.into_state()?;
    let params = core::FjParams::new(omega, x0.into_state()?).map_err(err)?;
    state_out(py, &core::fj_step(&w.inner, &s, &params).map_err(err)?)
}

/// Largest per-component disagreement max_i x_i - min_i x_i.
#[pyfunction]
fn spread(x: StateInput) -> PyResult<f64> {
    Ok(core::spread(&x.into_state()?))
}

/// Ergodic analysis: diameter, minimal exponent h with a positive
/// contraction coefficient, tau(A^h), and the worst-case response bound.
#[pyfunction]
fn analyze<'py>(py: Python<'py>, w: &PyWeightMatrix) -> PyResult<Bound<'py, PyDict>> {
    let a = core::response_time_bound(&w.inner).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("diameter", a.diameter)?;
    d.set_item("h", a.h)?;
    d.set_item("tau_h", a.tau_h)?;
    d.set_item("bound", a.bound)?;
    Ok(d)
}

/// First slot at which the trajectory's spread drops below `eps`, or None
/// within the horizon.
#[pyfunction]
#[pyo3(signature = (w, x, eps, k_max = core::DEFAULT_K_MAX))]
fn consensus_time(
    w: &PyWeightMatrix,
    x: StateInput,
    eps: f64,
    k_max: usize,
) -> PyResult<Option<usize>> {
    core::consensus_time(&w.inner, &x.into_state()?, eps, k_max).map_err(err)
}

/// Whether node j's state stays inside the interval spanned by the others'
/// trajectories (attractiveness of the rest of the network).
#[pyfunction]
fn contraction_check(w: &PyWeightMatrix, x: StateInput, j: usize) -> PyResult<bool> {
    core::contraction_check(&w.inner, &x.into_state()?, j).map_err(err)
}

/// Run the locally-stopped simulation and return the report as a dict.
#[pyfunction]
#[pyo3(signature = (w, x, eps, detector = "yz", threshold = "diameter", max_steps = core::DEFAULT_MAX_STEPS))]
fn run<'py>(
    py: Python<'py>,
    w: &PyWeightMatrix,
    x: StateInput,
    eps: f64,
    detector: &str,
    threshold: &str,
    max_steps: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = SimConfig::new(w.inner.clone(), x.into_state()?, eps).map_err(err)?;
    cfg.detector = parse_detector(detector)?;
    let (t, _) = StopThreshold::for_graph(parse_threshold(threshold)?, &w.inner.graph());
    cfg.threshold = t;
    cfg.max_steps = max_steps;
    cfg.record_trace = false;
    let (report, _) = core::run(&cfg).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("global_eps_time", report.global_eps_time)?;
    d.set_item("uniform_local_time", report.uniform_local_time)?;
    d.set_item("stopping_time", report.first_stop_time)?;
    d.set_item("all_stop_time", report.all_stop_time)?;
    d.set_item("all_halt_latency", all_halt_latency(&report))?;
    d.set_item("response_time", report.response_time)?;
    d.set_item("soundness_ok", report.soundness_ok)?;
    d.set_item("assumption_violated", report.assumption_violated)?;
    d.set_item("fast_round_messages", report.fast_round_messages)?;
    Ok(d)
}

#[pymodule]
fn consensus_halt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWeightMatrix>()?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(iterate, m)?)?;
    m.add_function(wrap_pyfunction!(fj_step, m)?)?;
    m.add_function(wrap_pyfunction!(spread, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(consensus_time, m)?)?;
    m.add_function(wrap_pyfunction!(contraction_check, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
