use std::fmt::Write;

use crate::circuit::{Instruction, Register};
use crate::Circuit;

const KEYWORDS: &[&str] = &[
    "OPENQASM", "include", "qreg", "creg", "measure", "barrier", "if", "gate", "opaque", "reset",
    "pi", "U", "CX",
];

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&name)
}

/// Names and ranges used when writing registers back out.
struct Layout {
    qregs: Vec<Register>,
    cregs: Vec<Register>,
    /// register name and index for each flat qubit / classical bit
    qubit_names: Vec<(usize, usize)>,
    clbit_names: Vec<(usize, usize)>,
}

fn owners(regs: &[Register]) -> Vec<(usize, usize)> {
    regs.iter()
        .enumerate()
        .flat_map(|(r, reg)| (0..reg.size).map(move |i| (r, i)))
        .collect()
}

fn single(name: &str, size: usize) -> Vec<Register> {
    if size == 0 {
        Vec::new()
    } else {
        vec![Register { name: name.into(), offset: 0, size }]
    }
}

impl Layout {
    fn new(circuit: &Circuit) -> Self {
        let mut qregs = circuit.qregs().to_vec();
        let mut cregs = circuit.cregs().to_vec();
        let mut names: Vec<&str> = qregs.iter().chain(&cregs).map(|r| r.name.as_str()).collect();
        let total = names.len();
        names.sort_unstable();
        names.dedup();
        let usable = names.len() == total && names.iter().all(|n| is_identifier(n));
        if !usable || qregs.is_empty() {
            qregs = single("q", circuit.num_qubits());
        }
        if !usable || (cregs.is_empty() && circuit.num_clbits() > 0) {
            cregs = single("c", circuit.num_clbits());
        }

        // `if` can only test a whole register, so conditioned bits need
        // one-bit registers of their own
        let conditioned_wide = circuit.instructions().iter().any(|i| {
            i.as_gate()
                .and_then(|app| app.condition)
                .is_some_and(|c| cregs.iter().any(|r| r.size > 1 && (r.offset..r.offset + r.size).contains(&c.clbit)))
        });
        if conditioned_wide {
            let mut prefix = String::from("c");
            while qregs.iter().any(|r| {
                r.name.strip_prefix(prefix.as_str()).is_some_and(|rest| rest.chars().all(|c| c.is_ascii_digit()))
            }) {
                prefix.push('_');
            }
            cregs = (0..circuit.num_clbits())
                .map(|i| Register { name: format!("{prefix}{i}"), offset: i, size: 1 })
                .collect();
        }
        let qubit_names = owners(&qregs);
        let clbit_names = owners(&cregs);
        Self { qregs, cregs, qubit_names, clbit_names }
    }

    fn qubit(&self, q: usize) -> String {
        let (r, i) = self.qubit_names[q];
        format!("{}[{i}]", self.qregs[r].name)
    }

    fn clbit(&self, c: usize) -> String {
        let (r, i) = self.clbit_names[c];
        format!("{}[{i}]", self.cregs[r].name)
    }
}

/// Writes a circuit as an OpenQASM 2.0 program.
///
/// Parameters are printed with full precision, so `parse_qasm(&emit_qasm(c))`
/// reproduces the gates of `c` exactly. Noise settings have no OpenQASM
/// form and are not written.
pub fn emit_qasm(circuit: &Circuit) -> String {
    let layout = Layout::new(circuit);
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    for r in &layout.qregs {
        let _ = writeln!(out, "qreg {}[{}];", r.name, r.size);
    }
    for r in &layout.cregs {
        let _ = writeln!(out, "creg {}[{}];", r.name, r.size);
    }
    for instruction in circuit.instructions() {
        match instruction {
            Instruction::Gate(app) => {
                if let Some(cond) = app.condition {
                    let (r, _) = layout.clbit_names[cond.clbit];
                    let _ = write!(out, "if ({}=={}) ", layout.cregs[r].name, cond.value);
                }
                let name = match app.gate.name() {
                    "I" => "id".to_string(),
                    other => other.to_ascii_lowercase(),
                };
                out.push_str(&name);
                if !app.gate.params().is_empty() {
                    let params: Vec<String> = app.gate.params().iter().map(|p| format!("{p:?}")).collect();
                    let _ = write!(out, "({})", params.join(","));
                }
                let targets: Vec<String> = app.targets.iter().map(|&q| layout.qubit(q)).collect();
                let _ = writeln!(out, " {};", targets.join(","));
            }
            Instruction::Measure { qubit, clbit } => {
                let _ = writeln!(out, "measure {} -> {};", layout.qubit(*qubit), layout.clbit(*clbit));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Condition;
    use crate::gates::make_gate;
    use crate::qasm::parse_qasm;
    use crate::{random_circuit, Gate, GateKind};
    use proptest::prelude::*;

    fn g(name: &str, params: &[f64]) -> Gate {
        make_gate(name, params).unwrap()
    }

    #[test]
    fn bell_text() {
        let mut c = Circuit::new(2, 2).unwrap();
        c.gate(g("h", &[]), &[0]).unwrap();
        c.gate(g("cx", &[]), &[0, 1]).unwrap();
        c.measure(0, 0).unwrap();
        c.measure(1, 1).unwrap();
        assert_eq!(
            emit_qasm(&c),
            "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\n\
             h q[0];\ncx q[0],q[1];\nmeasure q[0] -> c[0];\nmeasure q[1] -> c[1];\n"
        );
    }

    #[test]
    fn empty_circuit_round_trips() {
        let c = Circuit::new(3, 0).unwrap();
        let text = emit_qasm(&c);
        assert!(!text.contains("creg"));
        let back = parse_qasm(&text).unwrap();
        assert_eq!(back.num_qubits(), 3);
        assert!(back.is_empty());
    }

    #[test]
    fn wide_condition_splits_classical_register() {
        let mut c = Circuit::new(2, 2).unwrap();
        c.measure(0, 1).unwrap();
        c.gate_if(g("x", &[]), &[1], Condition { clbit: 1, value: 1 }).unwrap();
        let text = emit_qasm(&c);
        assert!(text.contains("creg c0[1];\ncreg c1[1];"));
        assert!(text.contains("if (c1==1) x q[1];"));
        let back = parse_qasm(&text).unwrap();
        assert_eq!(back.instructions(), c.instructions());
    }

    #[test]
    fn named_registers_are_kept() {
        let src = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg a[1];\nqreg b[2];\ncreg m[1];\n\
                   cx a[0],b[1];\nmeasure b[0] -> m[0];\nif (m==0) rz(0.25) a[0];\n";
        assert_eq!(emit_qasm(&parse_qasm(src).unwrap()), src);
    }

    #[test]
    fn invalid_register_names_fall_back() {
        let mut c = Circuit::new(1, 0).unwrap();
        c.set_registers(vec![Register { name: "1bad".into(), offset: 0, size: 1 }], vec![]).unwrap();
        c.gate(g("x", &[]), &[0]).unwrap();
        assert!(emit_qasm(&c).contains("qreg q[1];"));
    }

    #[test]
    fn identity_and_u3() {
        let mut c = Circuit::new(1, 0).unwrap();
        c.gate(g("I", &[]), &[0]).unwrap();
        c.gate(g("U3", &[0.1, -2.5e-9, 3.0]), &[0]).unwrap();
        let back = parse_qasm(&emit_qasm(&c)).unwrap();
        assert_eq!(back.instructions(), c.instructions());
        assert_eq!(back.instructions()[0].as_gate().unwrap().gate.kind(), GateKind::I);
    }

    proptest! {
        #[test]
        fn random_circuits_round_trip(n in 2usize..7, depth in 1usize..12, seed in any::<u64>()) {
            let c = random_circuit(n, depth, seed).unwrap();
            let back = parse_qasm(&emit_qasm(&c)).unwrap();
            prop_assert_eq!(back.instructions(), c.instructions());
            prop_assert_eq!(back.num_qubits(), c.num_qubits());
        }

        #[test]
        fn parser_never_panics_and_positions_are_in_range(src in "[ -~\n]{0,80}") {
            if let Err(e) = parse_qasm(&src) {
                let lines = src.split('\n').count();
                prop_assert!(e.line >= 1 && e.line <= lines);
                let line = src.split('\n').nth(e.line - 1).unwrap();
                prop_assert!(e.column >= 1 && e.column <= line.chars().count() + 1);
            }
        }

        #[test]
        fn mutated_programs_never_panic(cut in 0usize..120, insert in "[ -~]{0,4}") {
            let base = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\nh q[0];\ncx q[0],q[1];\nrz(pi/4) q[1];\nmeasure q -> c;\n";
            let cut = cut.min(base.len());
            let src = format!("{}{}{}", &base[..cut], insert, &base[cut..]);
            let _ = parse_qasm(&src);
        }
    }
}
