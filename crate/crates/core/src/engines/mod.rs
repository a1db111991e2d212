//! Circuit execution engines.
//!
//! All engines start from `|0…0⟩`, honour classical conditions and collapse the
//! state on measurement. The measurement random number for instruction `i` is
//! drawn from ChaCha8 seeded with `config.seed` on stream `i`, so every engine
//! sees the same sample for the same measurement regardless of execution order.

mod depth;
pub mod mps;
mod simple;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gates::gate_tensor_on;
use crate::noise::apply_noisy_gate;
use crate::{
    Circuit, Condition, DensityMatrix, Error, Gate, MeasurementRecord, NoiseSpec, PureState,
    Result, State,
};

pub use depth::run_depth;
pub use mps::{run_mps, Mps};
pub use simple::run_simple;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Representation {
    #[default]
    WaveFunction,
    Density,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::WaveFunction => "wave",
            Representation::Density => "density",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wave" | "wavefunction" | "wave_function" | "pure" => Ok(Representation::WaveFunction),
            "density" | "density_matrix" | "mixed" => Ok(Representation::Density),
            other => Err(Error::InvalidConfig(format!("unknown representation `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EngineKind {
    #[default]
    Simple,
    Mps,
    Depth,
}

impl EngineKind {
    pub const ALL: [EngineKind; 3] = [EngineKind::Simple, EngineKind::Mps, EngineKind::Depth];

    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Simple => "simple",
            EngineKind::Mps => "mps",
            EngineKind::Depth => "depth",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simple" => Ok(EngineKind::Simple),
            "mps" => Ok(EngineKind::Mps),
            "depth" => Ok(EngineKind::Depth),
            other => Err(Error::InvalidConfig(format!("unknown engine `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub representation: Representation,
    pub engine: EngineKind,
    /// Depth engine only: stop after this many layers.
    pub max_depth: Option<usize>,
    /// MPS engine only: keep at most this many singular values per bond.
    pub mps_max_bond: Option<usize>,
    /// MPS engine only: singular values below this are discarded.
    pub mps_truncation_threshold: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            representation: Representation::WaveFunction,
            engine: EngineKind::Simple,
            max_depth: None,
            mps_max_bond: None,
            mps_truncation_threshold: 1e-12,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn new(engine: EngineKind, representation: Representation) -> Self {
        Self { engine, representation, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = Some(max_depth);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub final_state: State,
    pub classical_bits: Vec<u8>,
    pub measurements: Vec<MeasurementRecord>,
    pub layers_executed: usize,
    /// Gates actually applied; conditioned gates whose bit mismatched are
    /// not counted.
    pub gates_applied: usize,
    /// Largest bond dimension reached (MPS engine only).
    pub max_bond: Option<usize>,
}

/// Runs `circuit` on the engine selected in `config`.
pub fn run(circuit: &Circuit, config: &RunConfig) -> Result<RunResult> {
    match config.engine {
        EngineKind::Simple => run_simple(circuit, config),
        EngineKind::Mps => run_mps(circuit, config),
        EngineKind::Depth => run_depth(circuit, config),
    }
}

fn check_config(circuit: &Circuit, config: &RunConfig, engine: EngineKind) -> Result<()> {
    circuit.validate()?;
    if config.representation == Representation::WaveFunction && circuit.has_noise() {
        return Err(Error::NoiseRequiresDensity);
    }
    match config.max_depth {
        Some(0) => return Err(Error::InvalidConfig("max depth must be at least 1".into())),
        Some(_) if engine != EngineKind::Depth => {
            return Err(Error::InvalidConfig(format!(
                "max depth applies to the depth engine, not {engine}"
            )))
        }
        _ => {}
    }
    if engine == EngineKind::Mps {
        if config.representation == Representation::Density {
            return Err(Error::Unsupported(
                "the MPS engine runs on wave functions only".into(),
            ));
        }
        if config.mps_max_bond == Some(0) {
            return Err(Error::InvalidConfig("MPS bond cap must be at least 1".into()));
        }
        let t = config.mps_truncation_threshold;
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidConfig(format!("truncation threshold {t} is invalid")));
        }
    }
    Ok(())
}

fn initial_state(representation: Representation, num_qubits: usize) -> Result<State> {
    Ok(match representation {
        Representation::WaveFunction => State::Pure(PureState::zero(num_qubits)?),
        Representation::Density => State::Density(DensityMatrix::zero(num_qubits)?),
    })
}

/// Uniform sample in `[0, 1)` for the measurement at instruction `index`.
pub fn measurement_sample(seed: u64, index: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.random()
}

/// Applies a gate (with optional noise) on `targets` of `state`.
fn apply_gate(
    state: &State,
    gate: &Gate,
    targets: &[usize],
    noise: Option<&NoiseSpec>,
) -> Result<State> {
    match (state, noise) {
        (State::Density(rho), Some(spec)) => {
            Ok(State::Density(apply_noisy_gate(rho, gate, targets, spec)?))
        }
        (State::Pure(_), Some(spec)) if !spec.is_empty() => Err(Error::NoiseRequiresDensity),
        _ => state.apply_unitary(&gate_tensor_on(gate, targets, state.num_qubits())?),
    }
}

/// Classical register and bookkeeping shared by the engines.
struct Classical {
    seed: u64,
    bits: Vec<u8>,
    measurements: Vec<MeasurementRecord>,
    gates_applied: usize,
}

impl Classical {
    fn new(circuit: &Circuit, seed: u64) -> Self {
        Self {
            seed,
            bits: vec![0; circuit.num_clbits()],
            measurements: Vec::new(),
            gates_applied: 0,
        }
    }

    fn allows(&self, condition: Option<Condition>) -> bool {
        condition.is_none_or(|c| self.bits[c.clbit] == c.value)
    }

    fn sample(&self, index: usize) -> f64 {
        measurement_sample(self.seed, index)
    }

    fn record(&mut self, qubit: usize, clbit: usize, outcome: u8, p0: f64) {
        self.bits[clbit] = outcome;
        let probability_of_outcome = if outcome == 0 { p0 } else { 1.0 - p0 };
        self.measurements.push(MeasurementRecord {
            qubit_index: qubit,
            classical_bit: clbit,
            outcome,
            probability_of_outcome: probability_of_outcome.clamp(0.0, 1.0),
        });
    }

    fn finish(
        self,
        final_state: State,
        layers_executed: usize,
        max_bond: Option<usize>,
    ) -> RunResult {
        RunResult {
            final_state,
            classical_bits: self.bits,
            measurements: self.measurements,
            layers_executed,
            gates_applied: self.gates_applied,
            max_bond,
        }
    }
}
