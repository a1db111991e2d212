//! Python bindings, importable as `tensim`.
//!
//! ```python
//! import tensim
//! c = tensim.Circuit.from_qasm(open("bell.qasm").read())
//! r = tensim.run(c, engine="mps", seed=7)
//! r.classical_bits, r.state
//! ```

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use tensim::bench;
use tensim::engines::{self, EngineKind, Representation, RunConfig};
use tensim::gates::make_gate;
use tensim::{
    Condition, DensityMatrix, NoiseChannel, NoiseKind, NoiseSpec, PureState, State,
};

create_exception!(tensim, TensimError, PyException, "Simulator error.");
create_exception!(tensim, QasmError, TensimError, "OpenQASM lexing, syntax or semantic error.");

fn py_err(e: tensim::Error) -> PyErr {
    match e {
        tensim::Error::Parse(p) => QasmError::new_err((p.to_string(), p.line, p.column)),
        other => TensimError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = tensim::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

fn channel(kind: &str, epsilon: f64) -> PyResult<NoiseChannel> {
    NoiseChannel::named(parse(kind)?, epsilon).map_err(py_err)
}

#[pyclass(name = "Circuit", module = "tensim", from_py_object)]
#[derive(Clone)]
struct PyCircuit {
    inner: tensim::Circuit,
}

#[pymethods]
impl PyCircuit {
    #[new]
    #[pyo3(signature = (num_qubits, num_clbits = 0))]
    fn new(num_qubits: usize, num_clbits: usize) -> PyResult<Self> {
        Ok(Self { inner: tensim::Circuit::new(num_qubits, num_clbits).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_qasm(source: &str) -> PyResult<Self> {
        tensim::parse_qasm(source)
            .map(|inner| Self { inner })
            .map_err(|e| py_err(e.into()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: tensim::Circuit::from_json(text).map_err(py_err)? })
    }

    /// Random benchmark circuit of alternating single-qubit and CX layers.
    #[staticmethod]
    #[pyo3(signature = (num_qubits, depth, seed = 0))]
    fn random(num_qubits: usize, depth: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: tensim::random_circuit(num_qubits, depth, seed).map_err(py_err)? })
    }

    /// Appends a gate; `condition` is `(clbit, value)`. Returns the instruction index.
    #[pyo3(signature = (name, targets, params = Vec::new(), condition = None))]
    fn gate(
        &mut self,
        name: &str,
        targets: Vec<usize>,
        params: Vec<f64>,
        condition: Option<(usize, u8)>,
    ) -> PyResult<usize> {
        let gate = make_gate(name, &params).map_err(py_err)?;
        match condition {
            None => self.inner.gate(gate, &targets),
            Some((clbit, value)) => self.inner.gate_if(gate, &targets, Condition { clbit, value }),
        }
        .map_err(py_err)
    }

    fn measure(&mut self, qubit: usize, clbit: usize) -> PyResult<usize> {
        self.inner.measure(qubit, clbit).map_err(py_err)
    }

    /// Applies `kind` noise of strength `epsilon` to every gate, or clears it with `None`.
    #[pyo3(signature = (kind, epsilon = 0.0))]
    fn set_global_noise(&mut self, kind: Option<&str>, epsilon: f64) -> PyResult<()> {
        let ch = kind.map(|k| channel(k, epsilon)).transpose()?;
        self.inner.set_global_noise(ch);
        Ok(())
    }

    /// Per-target noise for one gate: a list of `(kind, epsilon)` or `None` per slot.
    fn set_noise(&mut self, index: usize, slots: Vec<Option<(String, f64)>>) -> PyResult<()> {
        let mut spec = NoiseSpec::new();
        for (slot, entry) in slots.into_iter().enumerate() {
            let ch = entry.map(|(k, e)| channel(&k, e)).transpose()?;
            spec.set_slot(slot, ch).map_err(py_err)?;
        }
        self.inner.set_noise(index, Some(spec)).map_err(py_err)
    }

    fn to_qasm(&self) -> String {
        tensim::emit_qasm(&self.inner)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    #[getter]
    fn num_clbits(&self) -> usize {
        self.inner.num_clbits()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Circuit(num_qubits={}, num_clbits={}, instructions={})",
            self.inner.num_qubits(),
            self.inner.num_clbits(),
            self.inner.len()
        )
    }
}

#[pyclass(name = "RunResult", module = "tensim", frozen)]
struct PyRunResult {
    inner: tensim::RunResult,
}

#[pymethods]
impl PyRunResult {
    /// Amplitudes (wave function) or rows of the density matrix.
    #[getter]
    fn state<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        match &self.inner.final_state {
            State::Pure(p) => Ok(p.amplitudes().iter().copied().collect::<Vec<_>>().into_pyobject(py)?.into_any()),
            State::Density(d) => Ok(rows(d).into_pyobject(py)?.into_any()),
        }
    }

    #[getter]
    fn is_density(&self) -> bool {
        self.inner.final_state.is_density()
    }

    /// Probability of each basis state, qubit 0 least significant.
    fn probabilities(&self) -> Vec<f64> {
        match &self.inner.final_state {
            State::Pure(p) => p.amplitudes().iter().map(|z| z.norm_sqr()).collect(),
            State::Density(d) => d.matrix().diagonal().iter().map(|z| z.re).collect(),
        }
    }

    #[getter]
    fn classical_bits(&self) -> Vec<u8> {
        self.inner.classical_bits.clone()
    }

    /// `(qubit, clbit, outcome, probability_of_outcome)` per measurement.
    #[getter]
    fn measurements(&self) -> Vec<(usize, usize, u8, f64)> {
        self.inner
            .measurements
            .iter()
            .map(|m| (m.qubit_index, m.classical_bit, m.outcome, m.probability_of_outcome))
            .collect()
    }

    #[getter]
    fn layers_executed(&self) -> usize {
        self.inner.layers_executed
    }

    #[getter]
    fn gates_applied(&self) -> usize {
        self.inner.gates_applied
    }

    #[getter]
    fn max_bond(&self) -> Option<usize> {
        self.inner.max_bond
    }
}

fn rows(d: &DensityMatrix) -> Vec<Vec<Complex64>> {
    let m = d.matrix();
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Executes a circuit from `|0…0⟩`.
#[pyfunction]
#[pyo3(signature = (circuit, engine = "simple", repr = "wave", seed = 0, max_depth = None, mps_max_bond = None, mps_threshold = 1e-12))]
fn run(
    py: Python<'_>,
    circuit: &PyCircuit,
    engine: &str,
    repr: &str,
    seed: u64,
    max_depth: Option<usize>,
    mps_max_bond: Option<usize>,
    mps_threshold: f64,
) -> PyResult<PyRunResult> {
    let mut config = RunConfig::new(parse::<EngineKind>(engine)?, parse::<Representation>(repr)?).with_seed(seed);
    config.max_depth = max_depth;
    config.mps_max_bond = mps_max_bond;
    config.mps_truncation_threshold = mps_threshold;
    let circuit = circuit.inner.clone();
    let inner = py.detach(move || engines::run(&circuit, &config)).map_err(py_err)?;
    Ok(PyRunResult { inner })
}

fn density_from_py(obj: &Bound<'_, PyAny>) -> PyResult<DensityMatrix> {
    if let Ok(amps) = obj.extract::<Vec<Complex64>>() {
        return Ok(PureState::from_amplitudes(amps).map_err(py_err)?.to_density());
    }
    let rows: Vec<Vec<Complex64>> = obj.extract()?;
    let dim = rows.len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(TensimError::new_err("density matrix must be square"));
    }
    let m = tensim::CMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
    DensityMatrix::from_matrix(m).map_err(py_err)
}

/// Mixed-state fidelity. Each argument is an amplitude list or a density matrix as rows.
#[pyfunction]
fn fidelity(a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>) -> PyResult<f64> {
    tensim::fidelity(&density_from_py(a)?, &density_from_py(b)?).map_err(py_err)
}

/// `[(epsilon, fidelity), …]` for one random circuit under `kind` noise.
#[pyfunction]
#[pyo3(signature = (num_qubits, depth, kind, epsilons, seed = 0))]
fn fidelity_sweep(
    py: Python<'_>,
    num_qubits: usize,
    depth: usize,
    kind: &str,
    epsilons: Vec<f64>,
    seed: u64,
) -> PyResult<Vec<(f64, f64)>> {
    let kind: NoiseKind = parse(kind)?;
    let points = py
        .detach(|| bench::fidelity_sweep(num_qubits, depth, kind, &epsilons, seed))
        .map_err(py_err)?;
    Ok(points.into_iter().map(|p| (p.epsilon, p.fidelity)).collect())
}

/// `[(depth, median_seconds), …]` for `engine` on random circuits.
#[pyfunction]
#[pyo3(signature = (num_qubits, depths, engine = "mps", repetitions = 3, seed = 0))]
fn bench_depth_sweep(
    py: Python<'_>,
    num_qubits: usize,
    depths: Vec<usize>,
    engine: &str,
    repetitions: usize,
    seed: u64,
) -> PyResult<Vec<(usize, f64)>> {
    let engine: EngineKind = parse(engine)?;
    let points = py
        .detach(|| bench::bench_depth_sweep(num_qubits, &depths, engine, repetitions, seed))
        .map_err(py_err)?;
    Ok(points.into_iter().map(|p| (p.depth, p.wall_time_seconds)).collect())
}

#[pymodule]
#[pyo3(name = "tensim")]
fn tensim_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCircuit>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(bench_depth_sweep, m)?)?;
    m.add("TensimError", m.py().get_type::<TensimError>())?;
    m.add("QasmError", m.py().get_type::<QasmError>())?;
    Ok(())
}
