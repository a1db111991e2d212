//! Named one- and two-qubit gates and their embedding into a register.
//!
//! For a two-qubit gate acting on `targets = [a, b]`, the gate matrix is
//! indexed by `2·bit(a) + bit(b)`: the first target is the more significant
//! local qubit. `CX` on `[control, target]` therefore has the textbook matrix.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::state::bit;
use crate::{CMatrix, Error, Result, C64};

const UNITARITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    RX,
    RY,
    RZ,
    U3,
    CX,
    CZ,
    SWAP,
}

impl GateKind {
    pub const ALL: [GateKind; 16] = [
        GateKind::I,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::U3,
        GateKind::CX,
        GateKind::CZ,
        GateKind::SWAP,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::I => "I",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "Sdg",
            GateKind::T => "T",
            GateKind::Tdg => "Tdg",
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::U3 => "U3",
            GateKind::CX => "CX",
            GateKind::CZ => "CZ",
            GateKind::SWAP => "SWAP",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::CX | GateKind::CZ | GateKind::SWAP => 2,
            _ => 1,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::RX | GateKind::RY | GateKind::RZ => 1,
            GateKind::U3 => 3,
            _ => 0,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    /// Case-insensitive lookup of the canonical names.
    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownGate(s.to_string()))
    }
}

/// A gate with its parameters and unitary matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "GateRepr", try_from = "GateRepr")]
pub struct Gate {
    kind: GateKind,
    params: Vec<f64>,
    matrix: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct GateRepr {
    name: String,
    #[serde(default)]
    params: Vec<f64>,
}

impl From<Gate> for GateRepr {
    fn from(g: Gate) -> Self {
        GateRepr { name: g.kind.name().to_string(), params: g.params }
    }
}

impl TryFrom<GateRepr> for Gate {
    type Error = Error;

    fn try_from(r: GateRepr) -> Result<Self> {
        make_gate(&r.name, &r.params)
    }
}

/// Equality is on the name and parameters; the matrix is derived from them.
impl PartialEq for Gate {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.params == other.params
    }
}

impl Gate {
    pub fn new(kind: GateKind, params: &[f64]) -> Result<Self> {
        if params.len() != kind.param_count() {
            return Err(Error::ParamCount {
                name: kind.name().to_string(),
                expected: kind.param_count(),
                got: params.len(),
            });
        }
        if let Some(p) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidParam(format!("{kind} angle {p} is not finite")));
        }
        let matrix = standard_matrix(kind, params);
        Ok(Self { kind, params: params.to_vec(), matrix })
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn arity(&self) -> usize {
        self.kind.arity()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Largest entry of `U U† − I`.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.matrix.nrows();
        (&self.matrix * self.matrix.adjoint() - CMatrix::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= UNITARITY_TOLERANCE
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
            write!(f, "({})", ps.join(", "))?;
        }
        Ok(())
    }
}

/// Looks up a gate by name (case-insensitive).
pub fn make_gate(name: &str, params: &[f64]) -> Result<Gate> {
    Gate::new(name.parse()?, params)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn m2(entries: [C64; 4]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &entries)
}

fn standard_matrix(kind: GateKind, p: &[f64]) -> CMatrix {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let h = FRAC_1_SQRT_2;
    match kind {
        GateKind::I => CMatrix::identity(2, 2),
        GateKind::X => m2([zero, one, one, zero]),
        GateKind::Y => m2([zero, c(0.0, -1.0), c(0.0, 1.0), zero]),
        GateKind::Z => m2([one, zero, zero, -one]),
        GateKind::H => m2([c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]),
        GateKind::S => m2([one, zero, zero, c(0.0, 1.0)]),
        GateKind::Sdg => m2([one, zero, zero, c(0.0, -1.0)]),
        GateKind::T => m2([one, zero, zero, c(h, h)]),
        GateKind::Tdg => m2([one, zero, zero, c(h, -h)]),
        GateKind::RX => {
            let (s, co) = (p[0] / 2.0).sin_cos();
            m2([c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
        }
        GateKind::RY => {
            let (s, co) = (p[0] / 2.0).sin_cos();
            m2([c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
        }
        GateKind::RZ => {
            let half = p[0] / 2.0;
            m2([C64::from_polar(1.0, -half), zero, zero, C64::from_polar(1.0, half)])
        }
        GateKind::U3 => {
            // OpenQASM 2.0: U(θ,φ,λ)
            let (theta, phi, lambda) = (p[0], p[1], p[2]);
            let (s, co) = (theta / 2.0).sin_cos();
            m2([
                c(co, 0.0),
                -C64::from_polar(s, lambda),
                C64::from_polar(s, phi),
                C64::from_polar(co, phi + lambda),
            ])
        }
        GateKind::CX => permutation4([0, 1, 3, 2]),
        GateKind::CZ => {
            let mut m = CMatrix::identity(4, 4);
            m[(3, 3)] = -one;
            m
        }
        GateKind::SWAP => permutation4([0, 2, 1, 3]),
    }
}

/// Permutation matrix sending basis state `j` to `perm[j]`.
fn permutation4(perm: [usize; 4]) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (j, &i) in perm.iter().enumerate() {
        m[(i, j)] = c(1.0, 0.0);
    }
    m
}

pub(crate) fn check_targets(targets: &[usize], num_qubits: usize) -> Result<()> {
    for (k, &t) in targets.iter().enumerate() {
        if t >= num_qubits {
            return Err(Error::QubitOutOfRange { index: t, num_qubits });
        }
        if targets[..k].contains(&t) {
            return Err(Error::InvalidTargets(format!("qubit {t} repeated")));
        }
    }
    Ok(())
}

/// Embeds a `2^k × 2^k` operator acting on `targets` (first target most
/// significant) into a `num_qubits` register. The operator need not be
/// unitary; Kraus operators are embedded the same way.
pub fn embed_operator(op: &CMatrix, targets: &[usize], num_qubits: usize) -> Result<CMatrix> {
    let k = targets.len();
    if k == 0 || op.nrows() != 1 << k || op.ncols() != 1 << k {
        return Err(Error::InvalidTargets(format!(
            "a {}x{} operator cannot act on {k} target(s)",
            op.nrows(),
            op.ncols()
        )));
    }
    check_targets(targets, num_qubits)?;
    let dim = 1usize << num_qubits;
    let target_mask: usize = targets.iter().map(|&t| 1usize << t).sum();
    let local = |i: usize| targets.iter().fold(0usize, |acc, &t| (acc << 1) | bit(i, t));
    let scatter = |l: usize| {
        targets
            .iter()
            .enumerate()
            .fold(0usize, |acc, (pos, &t)| acc | (((l >> (k - 1 - pos)) & 1) << t))
    };
    let mut full = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let rest = col & !target_mask;
        let l_in = local(col);
        for l_out in 0..(1usize << k) {
            let v = op[(l_out, l_in)];
            if v != c(0.0, 0.0) {
                full[(rest | scatter(l_out), col)] = v;
            }
        }
    }
    Ok(full)
}

/// Full-register unitary applying `gate` to `targets`.
pub fn gate_tensor_on(gate: &Gate, targets: &[usize], num_qubits: usize) -> Result<CMatrix> {
    if targets.len() != gate.arity() {
        return Err(Error::InvalidTargets(format!(
            "{} acts on {} qubit(s), got {} target(s)",
            gate.name(),
            gate.arity(),
            targets.len()
        )));
    }
    embed_operator(gate.matrix(), targets, num_qubits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::test_util::{max_abs_diff, random_pure, rng};
    use crate::PureState;
    use proptest::prelude::*;
    use rand::Rng;

    fn gate(name: &str, params: &[f64]) -> Gate {
        make_gate(name, params).unwrap()
    }

    #[test]
    fn hadamard_matrix() {
        let h = gate("H", &[]);
        let s = FRAC_1_SQRT_2;
        let expected = m2([c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]);
        assert_eq!(h.matrix(), &expected);
    }

    #[test]
    fn zero_rotation_is_identity() {
        for name in ["RX", "RY", "RZ"] {
            let g = gate(name, &[0.0]);
            assert!(max_abs_diff(g.matrix(), &CMatrix::identity(2, 2)) < 1e-15);
        }
    }

    #[test]
    fn rz_convention() {
        let theta = 0.7;
        let g = gate("rz", &[theta]);
        assert!((g.matrix()[(0, 0)] - C64::from_polar(1.0, -theta / 2.0)).norm() < 1e-15);
        assert!((g.matrix()[(1, 1)] - C64::from_polar(1.0, theta / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn u3_matches_rotation_decomposition() {
        let mut r = rng(17);
        let zero = PureState::zero(1).unwrap();
        for _ in 0..20 {
            let (theta, phi, lambda) = (
                r.random::<f64>() * 6.3,
                r.random::<f64>() * 6.3,
                r.random::<f64>() * 6.3,
            );
            let u3 = gate("U3", &[theta, phi, lambda]);
            let composed = gate("RZ", &[phi]).matrix()
                * gate("RY", &[theta]).matrix()
                * gate("RZ", &[lambda]).matrix();
            let a = zero.apply_unitary(u3.matrix()).unwrap();
            let b = zero.apply_unitary(&composed).unwrap();
            // equal up to global phase
            let overlap = a.inner(&b).unwrap().norm_sqr();
            assert!((overlap - 1.0).abs() < 1e-12);
            // and the full matrices agree up to e^{-i(φ+λ)/2}
            let phase = C64::from_polar(1.0, -(phi + lambda) / 2.0);
            assert!(max_abs_diff(&(u3.matrix() * phase), &composed) < 1e-12);
        }
    }

    #[test]
    fn all_gates_are_unitary() {
        for kind in GateKind::ALL {
            let params: Vec<f64> = (0..kind.param_count()).map(|i| 0.3 + i as f64).collect();
            let g = Gate::new(kind, &params).unwrap();
            assert!(g.is_unitary(), "{kind}");
            assert_eq!(g.matrix().nrows(), 1 << kind.arity());
        }
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(make_gate("ccx", &[]), Err(Error::UnknownGate(_))));
        assert!(matches!(make_gate("RX", &[]), Err(Error::ParamCount { expected: 1, .. })));
        assert!(matches!(make_gate("H", &[1.0]), Err(Error::ParamCount { expected: 0, .. })));
        assert!(matches!(make_gate("U3", &[1.0, 2.0]), Err(Error::ParamCount { .. })));
        assert!(make_gate("RZ", &[f64::NAN]).is_err());
    }

    #[test]
    fn x_on_qubit_zero() {
        let u = gate_tensor_on(&gate("X", &[]), &[0], 2).unwrap();
        let out = PureState::zero(2).unwrap().apply_unitary(&u).unwrap();
        assert_eq!(out.amplitudes()[1], c(1.0, 0.0));
        let expected = CMatrix::identity(2, 2).kronecker(gate("X", &[]).matrix());
        assert_eq!(u, expected);
    }

    #[test]
    fn cx_truth_table() {
        let u = gate_tensor_on(&gate("CX", &[]), &[0, 1], 2).unwrap();
        let from_01 = PureState::basis(2, 0b01).unwrap().apply_unitary(&u).unwrap();
        assert_eq!(from_01.amplitudes()[0b11], c(1.0, 0.0));
        let from_00 = PureState::basis(2, 0).unwrap().apply_unitary(&u).unwrap();
        assert_eq!(from_00.amplitudes()[0], c(1.0, 0.0));
    }

    #[test]
    fn distant_reversed_cx_matches_permutation_oracle() {
        let u = gate_tensor_on(&gate("CX", &[]), &[2, 0], 4).unwrap();
        let mut oracle = CMatrix::zeros(16, 16);
        for i in 0..16usize {
            let j = if (i >> 2) & 1 == 1 { i ^ 1 } else { i };
            oracle[(j, i)] = c(1.0, 0.0);
        }
        assert_eq!(u, oracle);
    }

    #[test]
    fn invalid_targets_rejected() {
        let cx = gate("CX", &[]);
        assert!(gate_tensor_on(&cx, &[0, 0], 2).is_err());
        assert!(gate_tensor_on(&cx, &[0, 2], 2).is_err());
        assert!(gate_tensor_on(&cx, &[0], 2).is_err());
        assert!(gate_tensor_on(&gate("H", &[]), &[0, 1], 2).is_err());
    }

    #[test]
    fn embedded_gate_acts_like_state_level_oracle() {
        // apply RY on qubit 1 of 3 by explicit amplitude pairing
        let mut r = rng(2);
        let psi = random_pure(3, &mut r);
        let g = gate("RY", &[1.1]);
        let u = gate_tensor_on(&g, &[1], 3).unwrap();
        let got = psi.apply_unitary(&u).unwrap();
        for i in 0..8usize {
            if i & 2 != 0 {
                continue;
            }
            let (a0, a1) = (psi.amplitudes()[i], psi.amplitudes()[i | 2]);
            let m = g.matrix();
            assert!((got.amplitudes()[i] - (m[(0, 0)] * a0 + m[(0, 1)] * a1)).norm() < 1e-14);
            assert!((got.amplitudes()[i | 2] - (m[(1, 0)] * a0 + m[(1, 1)] * a1)).norm() < 1e-14);
        }
    }

    fn any_gate() -> impl Strategy<Value = Gate> {
        (0..GateKind::ALL.len(), prop::array::uniform3(-7.0f64..7.0)).prop_map(|(i, p)| {
            let kind = GateKind::ALL[i];
            Gate::new(kind, &p[..kind.param_count()]).unwrap()
        })
    }

    proptest! {
        #[test]
        fn embedding_is_unitary(g in any_gate(), n in 2usize..=5, seed in any::<u64>()) {
            let mut targets: Vec<usize> = (0..n).collect();
            let mut r = rng(seed);
            for i in (1..n).rev() {
                targets.swap(i, r.random_range(0..=i));
            }
            targets.truncate(g.arity());
            let u = gate_tensor_on(&g, &targets, n).unwrap();
            let dim = 1 << n;
            let defect = max_abs_diff(&(&u * u.adjoint()), &CMatrix::identity(dim, dim));
            prop_assert!(defect < 1e-12);
        }

        #[test]
        fn swap_is_symmetric(n in 2usize..=5, a in 0usize..5, b in 0usize..5) {
            prop_assume!(a < n && b < n && a != b);
            let swap = gate("SWAP", &[]);
            prop_assert_eq!(
                gate_tensor_on(&swap, &[a, b], n).unwrap(),
                gate_tensor_on(&swap, &[b, a], n).unwrap()
            );
        }
    }
}
