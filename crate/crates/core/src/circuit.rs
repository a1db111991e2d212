//! Circuit representation, depth layering and the random benchmark circuits.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gates::check_targets;
use crate::{Error, Gate, GateKind, NoiseChannel, NoiseSpec, Result};

/// Gate guard: the gate runs only if `clbit` currently holds `value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub clbit: usize,
    pub value: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateApp {
    pub gate: Gate,
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<Condition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Instruction {
    Gate(GateApp),
    Measure { qubit: usize, clbit: usize },
}

impl Instruction {
    pub fn qubits(&self) -> &[usize] {
        match self {
            Instruction::Gate(app) => &app.targets,
            Instruction::Measure { qubit, .. } => std::slice::from_ref(qubit),
        }
    }

    /// Classical bits read or written by this instruction.
    pub fn clbits(&self) -> Option<usize> {
        match self {
            Instruction::Gate(app) => app.condition.map(|c| c.clbit),
            Instruction::Measure { clbit, .. } => Some(*clbit),
        }
    }

    pub fn as_gate(&self) -> Option<&GateApp> {
        match self {
            Instruction::Gate(app) => Some(app),
            Instruction::Measure { .. } => None,
        }
    }

    pub fn is_measure(&self) -> bool {
        matches!(self, Instruction::Measure { .. })
    }
}

/// A named, contiguous slice of the flat qubit or classical-bit index space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub offset: usize,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    instructions: Vec<Instruction>,
    #[serde(default)]
    global_noise: Option<NoiseChannel>,
    #[serde(default)]
    qregs: Vec<Register>,
    #[serde(default)]
    cregs: Vec<Register>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidCircuit("a circuit needs at least one qubit".into()));
        }
        Ok(Self {
            num_qubits,
            num_clbits,
            instructions: Vec::new(),
            global_noise: None,
            qregs: Vec::new(),
            cregs: Vec::new(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn qregs(&self) -> &[Register] {
        &self.qregs
    }

    pub fn cregs(&self) -> &[Register] {
        &self.cregs
    }

    /// Records how named registers map onto the flat index spaces.
    pub fn set_registers(&mut self, qregs: Vec<Register>, cregs: Vec<Register>) -> Result<()> {
        check_registers(&qregs, self.num_qubits, "qreg")?;
        check_registers(&cregs, self.num_clbits, "creg")?;
        self.qregs = qregs;
        self.cregs = cregs;
        Ok(())
    }

    pub fn global_noise(&self) -> Option<&NoiseChannel> {
        self.global_noise.as_ref()
    }

    pub fn set_global_noise(&mut self, channel: Option<NoiseChannel>) {
        self.global_noise = channel;
    }

    pub fn with_global_noise(mut self, channel: NoiseChannel) -> Self {
        self.global_noise = Some(channel);
        self
    }

    fn check_instruction(&self, instruction: &Instruction) -> Result<()> {
        match instruction {
            Instruction::Gate(app) => {
                if app.targets.len() != app.gate.arity() {
                    return Err(Error::InvalidTargets(format!(
                        "{} needs {} target(s), got {}",
                        app.gate.name(),
                        app.gate.arity(),
                        app.targets.len()
                    )));
                }
                check_targets(&app.targets, self.num_qubits)?;
                if let Some(cond) = app.condition {
                    self.check_clbit(cond.clbit)?;
                    if cond.value > 1 {
                        return Err(Error::InvalidCircuit(format!(
                            "condition value {} is not a bit",
                            cond.value
                        )));
                    }
                }
                if let Some(spec) = &app.noise {
                    if spec.slot_count() > app.gate.arity() {
                        return Err(Error::NoiseArity {
                            slots: spec.slot_count(),
                            arity: app.gate.arity(),
                        });
                    }
                }
            }
            Instruction::Measure { qubit, clbit } => {
                check_targets(&[*qubit], self.num_qubits)?;
                self.check_clbit(*clbit)?;
            }
        }
        Ok(())
    }

    fn check_clbit(&self, clbit: usize) -> Result<()> {
        if clbit >= self.num_clbits {
            return Err(Error::ClbitOutOfRange { index: clbit, num_clbits: self.num_clbits });
        }
        Ok(())
    }

    /// Appends a validated instruction and returns its index.
    pub fn push(&mut self, instruction: Instruction) -> Result<usize> {
        self.check_instruction(&instruction)?;
        self.instructions.push(instruction);
        Ok(self.instructions.len() - 1)
    }

    pub fn gate(&mut self, gate: Gate, targets: &[usize]) -> Result<usize> {
        self.push(Instruction::Gate(GateApp {
            gate,
            targets: targets.to_vec(),
            condition: None,
            noise: None,
        }))
    }

    pub fn gate_if(&mut self, gate: Gate, targets: &[usize], condition: Condition) -> Result<usize> {
        self.push(Instruction::Gate(GateApp {
            gate,
            targets: targets.to_vec(),
            condition: Some(condition),
            noise: None,
        }))
    }

    pub fn measure(&mut self, qubit: usize, clbit: usize) -> Result<usize> {
        self.push(Instruction::Measure { qubit, clbit })
    }

    /// Attaches (or clears) per-gate noise on instruction `index`.
    pub fn set_noise(&mut self, index: usize, spec: Option<NoiseSpec>) -> Result<()> {
        let Some(instruction) = self.instructions.get(index) else {
            return Err(Error::InvalidCircuit(format!("no instruction {index}")));
        };
        let Instruction::Gate(app) = instruction else {
            return Err(Error::InvalidCircuit(format!(
                "instruction {index} is a measurement; noise attaches to gates only"
            )));
        };
        if let Some(s) = &spec {
            if s.slot_count() > app.gate.arity() {
                return Err(Error::NoiseArity { slots: s.slot_count(), arity: app.gate.arity() });
            }
        }
        if let Instruction::Gate(app) = &mut self.instructions[index] {
            app.noise = spec;
        }
        Ok(())
    }

    /// The noise applied with instruction `index`: its own spec if present,
    /// otherwise the global channel on every target.
    pub fn effective_noise(&self, index: usize) -> Option<NoiseSpec> {
        let app = self.instructions.get(index)?.as_gate()?;
        match (&app.noise, &self.global_noise) {
            (Some(spec), _) => Some(spec.clone()),
            (None, Some(ch)) => Some(NoiseSpec::uniform(ch, app.gate.arity())),
            (None, None) => None,
        }
    }

    pub fn has_noise(&self) -> bool {
        self.global_noise.is_some()
            || self
                .instructions
                .iter()
                .filter_map(Instruction::as_gate)
                .any(|app| app.noise.as_ref().is_some_and(|s| !s.is_empty()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::InvalidCircuit("a circuit needs at least one qubit".into()));
        }
        check_registers(&self.qregs, self.num_qubits, "qreg")?;
        check_registers(&self.cregs, self.num_clbits, "creg")?;
        self.instructions.iter().try_for_each(|i| self.check_instruction(i))
    }

    /// 1-based layer of every instruction under greedy scheduling.
    ///
    /// Measurements and conditioned gates also wait on their classical bit.
    pub fn layer_assignment(&self) -> Vec<usize> {
        let mut qubit_layer = vec![0usize; self.num_qubits];
        let mut clbit_layer = vec![0usize; self.num_clbits];
        self.instructions
            .iter()
            .map(|instr| {
                let clbit = instr.clbits();
                let layer = 1 + instr
                    .qubits()
                    .iter()
                    .map(|&q| qubit_layer[q])
                    .chain(clbit.map(|c| clbit_layer[c]))
                    .max()
                    .unwrap_or(0);
                for &q in instr.qubits() {
                    qubit_layer[q] = layer;
                }
                if let Some(c) = clbit {
                    clbit_layer[c] = layer;
                }
                layer
            })
            .collect()
    }

    pub fn depth(&self) -> usize {
        self.layer_assignment().into_iter().max().unwrap_or(0)
    }

    /// Instruction indices grouped by layer, in program order within a layer.
    pub fn layers(&self) -> Vec<Vec<usize>> {
        let assignment = self.layer_assignment();
        let depth = assignment.iter().copied().max().unwrap_or(0);
        let mut layers = vec![Vec::new(); depth];
        for (i, layer) in assignment.into_iter().enumerate() {
            layers[layer - 1].push(i);
        }
        layers
    }

    /// The circuit made of the instructions in the first `max_layers` layers.
    pub fn layer_prefix(&self, max_layers: usize) -> Circuit {
        let assignment = self.layer_assignment();
        let mut prefix = self.clone();
        prefix.instructions = self
            .instructions
            .iter()
            .zip(assignment)
            .filter(|(_, l)| *l <= max_layers)
            .map(|(i, _)| i.clone())
            .collect();
        prefix
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let circuit: Circuit = serde_json::from_str(text)?;
        circuit.validate()?;
        Ok(circuit)
    }
}

fn check_registers(regs: &[Register], total: usize, what: &str) -> Result<()> {
    let mut next = 0;
    for r in regs {
        if r.offset != next || r.size == 0 {
            return Err(Error::InvalidCircuit(format!(
                "{what} `{}` does not continue the index space contiguously",
                r.name
            )));
        }
        next += r.size;
    }
    if !regs.is_empty() && next != total {
        return Err(Error::InvalidCircuit(format!(
            "{what} declarations cover {next} bits, circuit has {total}"
        )));
    }
    Ok(())
}

const SINGLE_QUBIT_POOL: [GateKind; 9] = [
    GateKind::H,
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::S,
    GateKind::T,
    GateKind::RX,
    GateKind::RY,
    GateKind::RZ,
];

/// Random nearest-neighbour benchmark circuit.
///
/// Layers alternate between a random single-qubit gate on every qubit and a
/// row of `CX(i, i+1)` gates whose pairing alternates between even offsets
/// `(0,1), (2,3), …` and odd offsets `(1,2), (3,4), …`. Each layer adds one unit
/// of depth; layers are generated until the requested depth is reached.
///
/// Randomness comes from ChaCha8 (`rand_chacha`) seeded with
/// `seed_from_u64(seed)`; single-qubit gates are drawn uniformly from
/// `{H, X, Y, Z, S, T, RX, RY, RZ}` and angles uniformly from `[0, 2π)`.
pub fn random_circuit(num_qubits: usize, depth: usize, seed: u64) -> Result<Circuit> {
    if num_qubits < 2 {
        return Err(Error::InvalidCircuit("random circuits need at least 2 qubits".into()));
    }
    if depth == 0 {
        return Err(Error::InvalidCircuit("random circuits need depth >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut circuit = Circuit::new(num_qubits, 0)?;
    let mut entangling_layers = 0usize;
    let mut layer = 0usize;
    while circuit.depth() < depth {
        if layer % 2 == 0 {
            for q in 0..num_qubits {
                let kind = SINGLE_QUBIT_POOL[rng.random_range(0..SINGLE_QUBIT_POOL.len())];
                let params: Vec<f64> =
                    (0..kind.param_count()).map(|_| rng.random_range(0.0..TAU)).collect();
                circuit.gate(Gate::new(kind, &params)?, &[q])?;
            }
        } else {
            // two qubits have only the (0,1) pairing
            let offset = if num_qubits > 2 { entangling_layers % 2 } else { 0 };
            for q in (offset..num_qubits - 1).step_by(2) {
                circuit.gate(Gate::new(GateKind::CX, &[])?, &[q, q + 1])?;
            }
            entangling_layers += 1;
        }
        layer += 1;
    }
    Ok(circuit)
}
