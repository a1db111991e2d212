//! A tensor-contraction quantum circuit simulator.
//!
//! Circuits over `n` qubits and `m` classical bits can be executed on either a
//! wave function ([`PureState`]) or a density matrix ([`DensityMatrix`]) by one
//! of three engines:
//!
//! - **simple**: the full register is formed up front and every gate is
//!   embedded into a `2^n`-dimensional operator and applied in program order.
//! - **mps**: the register is held as a matrix product state, one rank-3
//!   tensor per qubit; two-qubit gates are applied by contracting the shared
//!   bond and re-splitting with an SVD. The chain is contracted at the end.
//! - **depth**: gates are applied layer by layer; every qubit starts as its own
//!   subsystem and subsystems are merged only when a two-qubit gate spans
//!   them. Execution may stop after any number of layers.
//!
//! Noise is described by Kraus channels ([`NoiseChannel`]) attached to the whole
//! circuit or to individual gates, and requires the density-matrix
//! representation. Mid-circuit measurement writes classical bits which can
//! condition later gates.
//!
//! Qubit 0 is always the least significant bit of a basis-state index.
//!
//! ```
//! use tensim::{Circuit, Gate, GateKind, RunConfig, engines};
//!
//! let mut circuit = Circuit::new(2, 0).unwrap();
//! circuit.gate(Gate::new(GateKind::H, &[]).unwrap(), &[0]).unwrap();
//! circuit.gate(Gate::new(GateKind::CX, &[]).unwrap(), &[0, 1]).unwrap();
//!
//! let result = engines::run(&circuit, &RunConfig::default()).unwrap();
//! let psi = result.final_state.as_pure().unwrap();
//! assert!((psi.amplitudes()[0].re - 0.5f64.sqrt()).abs() < 1e-12);
//! assert!((psi.amplitudes()[3].re - 0.5f64.sqrt()).abs() < 1e-12);
//! ```

pub mod bench;
pub mod circuit;
pub mod config;
pub mod engines;
mod error;
pub mod gates;
mod linalg;
pub mod noise;
pub mod qasm;
pub mod state;

pub use circuit::{random_circuit, Circuit, Condition, GateApp, Instruction, Register};
pub use engines::{EngineKind, Representation, RunConfig, RunResult};
pub use error::{Error, Result};
pub use gates::{gate_tensor_on, Gate, GateKind};
pub use noise::{apply_noisy_gate, NoiseChannel, NoiseKind, NoiseSpec};
pub use qasm::{emit_qasm, parse_qasm, ParseError, ParseErrorKind};
pub use state::{
    fidelity, measure_qubit, partial_trace, pure_to_density, tensor_product, DensityMatrix,
    MeasurementRecord, PureState, State,
};

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for gates, Kraus operators and density matrices.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector used for wave functions.
pub type CVector = nalgebra::DVector<C64>;

/// Normalization tolerance shared by the state invariants.
pub const STATE_TOLERANCE: f64 = 1e-10;

/// Mixes `index` into `base` with the SplitMix64 finalizer.
///
/// Used wherever a family of reproducible seeds is derived from one user seed
/// (per-depth benchmark circuits, per-shot runs).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
