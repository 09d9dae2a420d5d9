//! Python bindings. Reports come back as plain dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use quasisynth::design::{self, DesignProblem};
use quasisynth::library::{self, GateLibrary, OptimizeOptions};
use quasisynth::pauli::{Axis, PauliObservable};
use quasisynth::pipeline::{self, CliffordTConfig, ControlConfig, PaiConfig, SolveOptions};
use quasisynth::sampler::{self, Circuit, EstimatorMode, QuasiprobabilityScheme};
use quasisynth::solver::{self, SolutionPath};
use quasisynth::{ptm, DensityMatrix, PauliTransferMatrix};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn axis(s: &str) -> PyResult<Axis> {
    s.parse().map_err(err)
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (s,))
}

#[pyclass(name = "PTM", module = "quasisynth", frozen, from_py_object)]
#[derive(Clone)]
struct PyPtm(PauliTransferMatrix);

#[pymethods]
impl PyPtm {
    #[new]
    fn new(n_qubits: usize, entries: Vec<f64>) -> PyResult<Self> {
        PauliTransferMatrix::from_row_major(n_qubits, &entries).map(PyPtm).map_err(err)
    }

    #[staticmethod]
    fn identity(n_qubits: usize) -> PyResult<Self> {
        PauliTransferMatrix::identity(n_qubits).map(PyPtm).map_err(err)
    }

    #[staticmethod]
    fn rotation(axis_name: &str, angle: f64) -> PyResult<Self> {
        Ok(PyPtm(ptm::rotation_gate(axis(axis_name)?, angle)))
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    fn row_major(&self) -> Vec<f64> {
        self.0.row_major()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        let m = self.0.matrix();
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    /// `self` applied after `other`.
    fn compose(&self, other: &PyPtm) -> PyResult<Self> {
        self.0.compose(&other.0).map(PyPtm).map_err(err)
    }

    fn apply(&self, v: Vec<f64>) -> PyResult<Vec<f64>> {
        if v.len() != self.0.dim() {
            return Err(err(format!("vector has length {}, expected {}", v.len(), self.0.dim())));
        }
        Ok(self.0.apply_vector(&v))
    }

    fn distance(&self, other: &PyPtm) -> PyResult<f64> {
        quasisynth::hs_distance(&self.0, &other.0).map_err(err)
    }

    fn invariant_violation(&self) -> f64 {
        self.0.invariant_violation()
    }

    fn __mul__(&self, other: &PyPtm) -> PyResult<Self> {
        self.compose(other)
    }

    fn __repr__(&self) -> String {
        format!("PTM(n_qubits={}, entries={:?})", self.0.n_qubits(), self.0.row_major())
    }
}

#[pyclass(name = "GateLibrary", module = "quasisynth", frozen, from_py_object)]
#[derive(Clone)]
struct PyLibrary(GateLibrary);

#[pymethods]
impl PyLibrary {
    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        GateLibrary::from_json(s).map(PyLibrary).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (bits, axis_name = "x"))]
    fn pai(bits: u32, axis_name: &str) -> PyResult<Self> {
        library::pai_library(bits, axis(axis_name)?).map(PyLibrary).map_err(err)
    }

    #[staticmethod]
    fn clifford() -> PyResult<Self> {
        let entries = library::clifford_group_1q()
            .into_iter()
            .map(|c| library::LibraryEntry::new(c.word.clone(), library::Provenance::Clifford, library::Payload::Word(c.word)))
            .collect::<quasisynth::Result<Vec<_>>>()
            .map_err(err)?;
        GateLibrary::new(entries, None, None).map(PyLibrary).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    fn labels(&self) -> Vec<String> {
        self.0.labels()
    }

    fn ptms(&self) -> PyResult<Vec<PyPtm>> {
        Ok(self.0.ptms().map_err(err)?.into_iter().map(PyPtm).collect())
    }

    fn ptm_at(&self, index: usize, offset: f64) -> PyResult<PyPtm> {
        let e = self.0.entries().get(index).ok_or_else(|| err(format!("no entry {index}")))?;
        e.ptm_at(offset).map(PyPtm).map_err(err)
    }

    fn select(&self, indices: Vec<usize>) -> PyResult<Self> {
        self.0.select(&indices).map(PyLibrary).map_err(err)
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("GateLibrary({} entries, n_qubits={})", self.0.len(), self.0.n_qubits())
    }
}

#[pyclass(name = "DesignProblem", module = "quasisynth", frozen, from_py_object)]
#[derive(Clone)]
struct PyProblem(DesignProblem);

#[pymethods]
impl PyProblem {
    /// Single target; `band` given switches to band-selective, `broadband` to the full offset grid.
    #[staticmethod]
    #[pyo3(signature = (library, desired, broadband = false, band = None))]
    fn build(library: &PyLibrary, desired: &PyPtm, broadband: bool, band: Option<f64>) -> PyResult<Self> {
        let p = match (band, broadband) {
            (Some(b), _) => design::build_band_selective(&library.0, &desired.0, b),
            (None, true) => design::build_broadband(&library.0, &desired.0),
            (None, false) => design::build_single_target(&library.0, &desired.0),
        };
        p.map(PyProblem).map_err(err)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        DesignProblem::from_json(s).map(PyProblem).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    #[staticmethod]
    fn from_binary(data: &[u8], n_qubits: usize) -> PyResult<Self> {
        DesignProblem::read_binary(data, n_qubits).map(PyProblem).map_err(err)
    }

    fn to_binary(&self) -> PyResult<Vec<u8>> {
        let mut out = Vec::new();
        self.0.write_binary(&mut out).map_err(err)?;
        Ok(out)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.rows(), self.0.cols())
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        let m = self.0.matrix();
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    fn target(&self) -> Vec<f64> {
        self.0.target().iter().copied().collect()
    }

    fn column_labels(&self) -> Vec<String> {
        self.0.column_labels().to_vec()
    }

    fn residual(&self, gamma: Vec<f64>) -> PyResult<f64> {
        self.0.residual(&gamma).map_err(err)
    }

    fn diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.diagnostics())
    }

    fn kkt<'py>(&self, py: Python<'py>, gamma: Vec<f64>, lam: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &solver::kkt_check(&self.0, &gamma, lam).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("DesignProblem({}x{})", self.0.rows(), self.0.cols())
    }
}

#[pyclass(name = "SolutionPath", module = "quasisynth", frozen)]
struct PyPath {
    path: SolutionPath,
    problem: DesignProblem,
}

#[pymethods]
impl PyPath {
    fn breakpoints<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.path.breakpoints)
    }

    fn termination<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.path.termination)
    }

    fn to_csv(&self) -> String {
        self.path.to_csv()
    }

    fn to_json(&self) -> PyResult<String> {
        self.path.to_json().map_err(err)
    }

    /// Solution at the end of a path that reaches zero residual.
    fn exact<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &solver::exact_solution(&self.problem, &self.path).map_err(err)?)
    }

    /// Best residual among solutions with `|gamma|_1` at most `l1`.
    fn at_l1<'py>(&self, py: Python<'py>, l1: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &solver::solution_at_l1(&self.problem, &self.path, l1).map_err(err)?)
    }

    #[pyo3(signature = (samples_per_segment = 8))]
    fn tradeoff(&self, samples_per_segment: usize) -> PyResult<Vec<(f64, f64)>> {
        solver::tradeoff_curve(&self.problem, &self.path, samples_per_segment).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.path.breakpoints.len()
    }
}

#[pyfunction]
#[pyo3(signature = (problem, lambda_floor = 0.0, max_breakpoints = 10_000))]
fn solve_path(problem: &PyProblem, lambda_floor: f64, max_breakpoints: usize) -> PyResult<PyPath> {
    let path = solver::solve_path(&problem.0, lambda_floor, max_breakpoints).map_err(err)?;
    Ok(PyPath { path, problem: problem.0.clone() })
}

#[pyclass(name = "Scheme", module = "quasisynth", frozen, from_py_object)]
#[derive(Clone)]
struct PyScheme(QuasiprobabilityScheme);

#[pymethods]
impl PyScheme {
    #[new]
    fn new(gamma: Vec<f64>, labels: Vec<String>) -> PyResult<Self> {
        QuasiprobabilityScheme::new(gamma, labels).map(PyScheme).map_err(err)
    }

    #[staticmethod]
    fn for_library(gamma: Vec<f64>, library: &PyLibrary) -> PyResult<Self> {
        sampler::scheme_from_gamma(&gamma, &library.0).map(PyScheme).map_err(err)
    }

    fn gamma(&self) -> Vec<f64> {
        self.0.gamma().to_vec()
    }

    fn probabilities(&self) -> Vec<f64> {
        self.0.probabilities().to_vec()
    }

    fn signs(&self) -> Vec<f64> {
        self.0.signs().to_vec()
    }

    #[getter]
    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn mean_ptm(&self, ptms: Vec<PyPtm>) -> PyResult<PyPtm> {
        let ptms: Vec<_> = ptms.into_iter().map(|p| p.0).collect();
        self.0.mean_ptm(&ptms).map(PyPtm).map_err(err)
    }
}

fn observable(s: &str) -> PyResult<PauliObservable> {
    PauliObservable::pauli(s).map_err(err)
}

fn mode(s: &str) -> PyResult<EstimatorMode> {
    match s {
        "analytic" => Ok(EstimatorMode::AnalyticWeight),
        "full" => Ok(EstimatorMode::FullShot),
        _ => Err(err(format!("unknown mode `{s}`, expected analytic or full"))),
    }
}

/// Circuit of fixed gates and sampled schemes applied in order.
#[pyclass(name = "Circuit", module = "quasisynth", frozen, from_py_object)]
#[derive(Clone)]
struct PyCircuit(Circuit);

#[pymethods]
impl PyCircuit {
    #[new]
    fn new(n_qubits: usize) -> PyResult<Self> {
        Circuit::new(n_qubits).map(PyCircuit).map_err(err)
    }

    fn fixed(&self, gate: &PyPtm) -> PyResult<Self> {
        self.0.clone().push_fixed(gate.0.clone()).map(PyCircuit).map_err(err)
    }

    fn scheme(&self, scheme: &PyScheme, ptms: Vec<PyPtm>) -> PyResult<Self> {
        let ptms = ptms.into_iter().map(|p| p.0).collect();
        self.0.clone().push_scheme(scheme.0.clone(), ptms).map(PyCircuit).map_err(err)
    }

    fn norms(&self) -> Vec<f64> {
        self.0.norms()
    }

    /// Noise-free expectation of a Pauli string on the computational basis state `basis`.
    #[pyo3(signature = (obs, basis = 0))]
    fn exact(&self, obs: &str, basis: usize) -> PyResult<f64> {
        let rho = DensityMatrix::basis_state(self.0.n_qubits(), basis).map_err(err)?;
        self.0.exact_expectation(&rho, &observable(obs)?).map_err(err)
    }

    #[pyo3(signature = (obs, shots, seed = 0, mode_name = "analytic", basis = 0))]
    fn estimate<'py>(
        &self,
        py: Python<'py>,
        obs: &str,
        shots: u64,
        seed: u64,
        mode_name: &str,
        basis: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let rho = DensityMatrix::basis_state(self.0.n_qubits(), basis).map_err(err)?;
        let (o, m) = (observable(obs)?, mode(mode_name)?);
        let c = self.0.clone();
        let r = py.detach(move || sampler::estimate_expectation(&c, &rho, &o, shots, m, seed)).map_err(err)?;
        to_py(py, &r)
    }
}

#[pyfunction]
fn shot_bound(epsilon: f64, norms: Vec<f64>, observable_norm: f64) -> PyResult<f64> {
    sampler::shot_bound(epsilon, &norms, observable_norm).map_err(err)
}

#[pyfunction]
fn notch_angle(bits: u32, index: u64) -> f64 {
    library::notch_angle(bits, index)
}

#[pyfunction]
fn pai_midpoint(bits: u32, k: u64) -> f64 {
    pipeline::pai_midpoint(bits, k)
}

fn solve_options(lambda_floor: f64, max_breakpoints: usize) -> SolveOptions {
    SolveOptions { lambda_floor, max_breakpoints, ..SolveOptions::default() }
}

#[pyfunction]
#[pyo3(signature = (theta, bits = 7, axis_name = "x", shots = 100_000, seed = 0, clifford_baseline = false, lambda_floor = 0.0, max_breakpoints = 10_000))]
#[allow(clippy::too_many_arguments)]
fn run_pai<'py>(
    py: Python<'py>,
    theta: f64,
    bits: u32,
    axis_name: &str,
    shots: u64,
    seed: u64,
    clifford_baseline: bool,
    lambda_floor: f64,
    max_breakpoints: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = PaiConfig {
        shots,
        seed,
        clifford_baseline,
        solve: solve_options(lambda_floor, max_breakpoints),
        ..PaiConfig::new(bits, axis(axis_name)?, theta)
    };
    let r = py.detach(|| pipeline::run_pai(&cfg)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (theta, t_budget = 8, epsilon = 0.4, max_entries = 20, clifford_recovery = true, shots = 100_000, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn run_clifford_t<'py>(
    py: Python<'py>,
    theta: f64,
    t_budget: usize,
    epsilon: f64,
    max_entries: usize,
    clifford_recovery: bool,
    shots: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = CliffordTConfig { max_entries, clifford_recovery, shots, seed, ..CliffordTConfig::new(theta, t_budget, epsilon) };
    let r = py.detach(|| pipeline::run_clifford_t(&cfg)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (pulses = 20, q = 7, range = (-2.0, 2.0), band = None, frame_variants = true, max_iterations = 2000, shots = 10_000, times = 32, t_max = 4.0, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn run_control<'py>(
    py: Python<'py>,
    pulses: usize,
    q: usize,
    range: (f64, f64),
    band: Option<f64>,
    frame_variants: bool,
    max_iterations: usize,
    shots: u64,
    times: usize,
    t_max: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ControlConfig {
        n_pulses: pulses,
        q,
        range,
        band,
        frame_variants,
        optimize: OptimizeOptions { max_iterations, seed, ..OptimizeOptions::default() },
        shots,
        n_times: times,
        t_max,
        ..ControlConfig::default()
    };
    let r = py.detach(|| pipeline::run_control(&cfg)).map_err(err)?;
    let out = to_py(py, &r)?;
    out.set_item("best_column_error", r.best_column_error())?;
    out.set_item("unit_norm_dominates", r.unit_norm_dominates())?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "quasisynth")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPtm>()?;
    m.add_class::<PyLibrary>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyPath>()?;
    m.add_class::<PyScheme>()?;
    m.add_class::<PyCircuit>()?;
    m.add_function(wrap_pyfunction!(solve_path, m)?)?;
    m.add_function(wrap_pyfunction!(shot_bound, m)?)?;
    m.add_function(wrap_pyfunction!(notch_angle, m)?)?;
    m.add_function(wrap_pyfunction!(pai_midpoint, m)?)?;
    m.add_function(wrap_pyfunction!(run_pai, m)?)?;
    m.add_function(wrap_pyfunction!(run_clifford_t, m)?)?;
    m.add_function(wrap_pyfunction!(run_control, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
