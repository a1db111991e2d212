use super::{apply_gate, check_config, initial_state, Classical, EngineKind, RunConfig, RunResult};
use crate::{measure_qubit, Circuit, Instruction, Result};

/// Forms the whole register up front and applies every instruction in
/// program order, embedding each gate into the full `2^n` space.
pub fn run_simple(circuit: &Circuit, config: &RunConfig) -> Result<RunResult> {
    check_config(circuit, config, EngineKind::Simple)?;
    let mut state = initial_state(config.representation, circuit.num_qubits())?;
    let mut classical = Classical::new(circuit, config.seed);
    for (index, instruction) in circuit.instructions().iter().enumerate() {
        match instruction {
            Instruction::Gate(app) => {
                if !classical.allows(app.condition) {
                    continue;
                }
                let noise = circuit.effective_noise(index);
                state = apply_gate(&state, &app.gate, &app.targets, noise.as_ref())?;
                classical.gates_applied += 1;
            }
            Instruction::Measure { qubit, clbit } => {
                let (outcome, collapsed, p0) =
                    measure_qubit(&state, *qubit, classical.sample(index))?;
                classical.record(*qubit, *clbit, outcome, p0);
                state = collapsed;
            }
        }
    }
    Ok(classical.finish(state, circuit.depth(), None))
}
