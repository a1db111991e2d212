use thiserror::Error;

use crate::qasm::ParseError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("classical bit index {index} out of range for {num_clbits} classical bits")]
    ClbitOutOfRange { index: usize, num_clbits: usize },

    #[error("invalid qubit selection: {0}")]
    InvalidTargets(String),

    #[error("operands have different representations (pure vs density)")]
    RepresentationMismatch,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("gate {name} expects {expected} parameter(s), got {got}")]
    ParamCount { name: String, expected: usize, got: usize },

    #[error("invalid gate parameter: {0}")]
    InvalidParam(String),

    #[error("invalid noise channel: {0}")]
    InvalidNoise(String),

    #[error("noise spec has {slots} slot(s) but the gate acts on {arity} qubit(s)")]
    NoiseArity { slots: usize, arity: usize },

    #[error("noisy circuits require the density-matrix representation")]
    NoiseRequiresDensity,

    #[error("cannot collapse onto outcome {outcome} of qubit {qubit}: probability {probability:e}")]
    ZeroProbabilityBranch { qubit: usize, outcome: u8, probability: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {0:e}")]
    NotPositiveSemidefinite(f64),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
