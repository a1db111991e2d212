use super::{apply_gate, check_config, initial_state, Classical, EngineKind, RunConfig, RunResult};
use crate::{measure_qubit, tensor_product, Circuit, Instruction, Result, State};

/// A set of qubits that has been combined into one state. Local qubit `k` of
/// `state` is global qubit `qubits[k]`.
struct Group {
    qubits: Vec<usize>,
    state: State,
}

impl Group {
    fn local(&self, qubit: usize) -> usize {
        self.qubits.iter().position(|&q| q == qubit).expect("qubit belongs to group")
    }
}

struct Register {
    groups: Vec<Option<Group>>,
    owner: Vec<usize>,
}

impl Register {
    fn new(circuit: &Circuit, config: &RunConfig) -> Result<Self> {
        let groups = (0..circuit.num_qubits())
            .map(|q| {
                Ok(Some(Group { qubits: vec![q], state: initial_state(config.representation, 1)? }))
            })
            .collect::<Result<_>>()?;
        Ok(Self { groups, owner: (0..circuit.num_qubits()).collect() })
    }

    /// Merges the groups holding `qubits` and returns the surviving index.
    fn combine(&mut self, qubits: &[usize]) -> Result<usize> {
        let target = self.owner[qubits[0]];
        for &q in &qubits[1..] {
            let other = self.owner[q];
            if other == target {
                continue;
            }
            let a = self.groups[target].take().expect("live group");
            let b = self.groups[other].take().expect("live group");
            // a ⊗ b puts b's qubits in the low positions
            let state = tensor_product(&a.state, &b.state)?;
            let mut merged = b.qubits;
            merged.extend(a.qubits);
            for &m in &merged {
                self.owner[m] = target;
            }
            self.groups[target] = Some(Group { qubits: merged, state });
        }
        Ok(target)
    }

    fn group_mut(&mut self, index: usize) -> &mut Group {
        self.groups[index].as_mut().expect("live group")
    }

    /// Combines every remaining group and restores global qubit order.
    fn into_state(self) -> Result<State> {
        let mut live = self.groups.into_iter().flatten();
        let first = live.next().expect("at least one qubit");
        let (mut labels, mut state) = (first.qubits, first.state);
        for g in live {
            state = tensor_product(&g.state, &state)?;
            labels.extend(g.qubits);
        }
        state.permute_qubits(&labels)
    }
}

/// Applies the circuit layer by layer, combining qubits only when a
/// multi-qubit gate spans separate groups. With `config.max_depth` set,
/// execution stops after that many layers.
pub fn run_depth(circuit: &Circuit, config: &RunConfig) -> Result<RunResult> {
    check_config(circuit, config, EngineKind::Depth)?;
    let layers = circuit.layers();
    let limit = config.max_depth.map_or(layers.len(), |d| d.min(layers.len()));
    let mut register = Register::new(circuit, config)?;
    let mut classical = Classical::new(circuit, config.seed);
    for layer in &layers[..limit] {
        for &index in layer {
            match &circuit.instructions()[index] {
                Instruction::Gate(app) => {
                    if !classical.allows(app.condition) {
                        continue;
                    }
                    let g = register.combine(&app.targets)?;
                    let group = register.group_mut(g);
                    let local: Vec<usize> = app.targets.iter().map(|&q| group.local(q)).collect();
                    let noise = circuit.effective_noise(index);
                    group.state = apply_gate(&group.state, &app.gate, &local, noise.as_ref())?;
                    classical.gates_applied += 1;
                }
                Instruction::Measure { qubit, clbit } => {
                    let g = register.owner[*qubit];
                    let group = register.group_mut(g);
                    let local = group.local(*qubit);
                    let (outcome, collapsed, p0) =
                        measure_qubit(&group.state, local, classical.sample(index))?;
                    group.state = collapsed;
                    classical.record(*qubit, *clbit, outcome, p0);
                }
            }
        }
    }
    Ok(classical.finish(register.into_state()?, limit, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::{run_simple, Representation};
    use crate::gates::make_gate;
    use crate::state::test_util::max_abs_diff;
    use crate::{fidelity, random_circuit, Gate, NoiseChannel};

    fn g(name: &str) -> Gate {
        make_gate(name, &[]).unwrap()
    }

    fn depth_config() -> RunConfig {
        RunConfig::new(EngineKind::Depth, Representation::WaveFunction)
    }

    fn bell() -> Circuit {
        let mut c = Circuit::new(2, 0).unwrap();
        c.gate(g("H"), &[0]).unwrap();
        c.gate(g("CX"), &[0, 1]).unwrap();
        c
    }

    #[test]
    fn early_stop_after_first_layer() {
        let r = run_depth(&bell(), &depth_config().with_max_depth(1)).unwrap();
        assert_eq!(r.layers_executed, 1);
        assert_eq!(r.gates_applied, 1);
        let psi = r.final_state.as_pure().unwrap();
        let h = 0.5f64.sqrt();
        assert!((psi.amplitudes()[0].re - h).abs() < 1e-15);
        assert!((psi.amplitudes()[1].re - h).abs() < 1e-15);
    }

    #[test]
    fn bell_matches_simple() {
        let a = run_depth(&bell(), &depth_config()).unwrap();
        let b = run_simple(&bell(), &RunConfig::default()).unwrap();
        let (a, b) = (a.final_state.as_pure().unwrap(), b.final_state.as_pure().unwrap());
        for i in 0..4 {
            assert!((a.amplitudes()[i] - b.amplitudes()[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn uncombined_qubits_keep_their_positions() {
        // X on qubit 2 only; groups {0}, {1}, {2} combined at the end
        let mut c = Circuit::new(3, 0).unwrap();
        c.gate(g("X"), &[2]).unwrap();
        c.gate(g("CX"), &[2, 0]).unwrap();
        let r = run_depth(&c, &depth_config()).unwrap();
        assert!((r.final_state.as_pure().unwrap().amplitudes()[0b101].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn truncated_run_equals_prefix_circuit() {
        let c = random_circuit(8, 12, 41).unwrap();
        let r = run_depth(&c, &depth_config().with_max_depth(7)).unwrap();
        assert_eq!(r.layers_executed, 7);
        let prefix = c.layer_prefix(7);
        let want = run_simple(&prefix, &RunConfig::default()).unwrap();
        let f = fidelity(&r.final_state.to_density(), &want.final_state.to_density()).unwrap();
        assert!(f >= 1.0 - 1e-10);
    }

    #[test]
    fn max_depth_beyond_circuit_runs_everything() {
        let r = run_depth(&bell(), &depth_config().with_max_depth(10)).unwrap();
        assert_eq!(r.layers_executed, 2);
    }

    #[test]
    fn noisy_density_matches_simple() {
        let c = random_circuit(4, 7, 13)
            .unwrap()
            .with_global_noise(NoiseChannel::amplitude_damping(0.2).unwrap());
        let cfg = RunConfig::new(EngineKind::Depth, Representation::Density);
        let a = run_depth(&c, &cfg).unwrap();
        let b = run_simple(&c, &RunConfig::new(EngineKind::Simple, Representation::Density)).unwrap();
        let (a, b) = (a.final_state.as_density().unwrap(), b.final_state.as_density().unwrap());
        assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-12);
    }
}
