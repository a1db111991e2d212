//! Single-qubit Kraus channels and their attachment to gates.
//!
//! Dephasing, amplitude damping and custom channels act on the gate's input
//! (`ρ → U ε(ρ) U†`). Depolarizing noise mixes the gate's *output* qubit with
//! `I/2` (`ρ → (1−ϵ) UρU† + ϵ I/2`). For two-qubit gates each target slot
//! carries its own channel and the pair acts as `ε₀ ⊗ ε₁`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::gates::{embed_operator, gate_tensor_on};
use crate::{CMatrix, DensityMatrix, Error, Gate, Result, C64};

/// Completeness tolerance for user-supplied Kraus operators.
const CUSTOM_COMPLETENESS_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Dephasing,
    Depolarizing,
    #[serde(alias = "amplitude-damping")]
    AmplitudeDamping,
    Custom,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Dephasing => "dephasing",
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::AmplitudeDamping => "amplitude_damping",
            NoiseKind::Custom => "custom",
        }
    }

    /// The three parametrized channels, in sweep order.
    pub const NAMED: [NoiseKind; 3] =
        [NoiseKind::Depolarizing, NoiseKind::Dephasing, NoiseKind::AmplitudeDamping];
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "dephasing" => Ok(NoiseKind::Dephasing),
            "depolarizing" => Ok(NoiseKind::Depolarizing),
            "amplitude_damping" => Ok(NoiseKind::AmplitudeDamping),
            "custom" => Ok(NoiseKind::Custom),
            other => Err(Error::InvalidNoise(format!("unknown noise kind `{other}`"))),
        }
    }
}

/// A single-qubit channel given by Kraus operators `E_k` with
/// `Σ E_k† E_k = I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ChannelRepr", try_from = "ChannelRepr")]
pub struct NoiseChannel {
    kind: NoiseKind,
    epsilon: f64,
    kraus: Vec<CMatrix>,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidNoise(format!("epsilon {epsilon} outside [0, 1]")));
    }
    Ok(())
}

fn m2(re: [f64; 4]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &re.map(|x| C64::new(x, 0.0)))
}

fn pauli_y() -> CMatrix {
    let (zero, i) = (C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    CMatrix::from_row_slice(2, 2, &[zero, -i, i, zero])
}

impl NoiseChannel {
    /// `ρ ↦ (1−ϵ)ρ + ϵ ZρZ†`, Kraus operators `{√(1−ϵ) I, √ϵ Z}`.
    pub fn dephasing(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let kraus = vec![
            m2([1.0, 0.0, 0.0, 1.0]) * C64::new((1.0 - epsilon).sqrt(), 0.0),
            m2([1.0, 0.0, 0.0, -1.0]) * C64::new(epsilon.sqrt(), 0.0),
        ];
        Ok(Self { kind: NoiseKind::Dephasing, epsilon, kraus })
    }

    /// `ρ ↦ (1−ϵ)ρ + ϵ I/2 ⊗ tr_q(ρ)`, applied after the gate.
    ///
    /// The Kraus form is `{√(1−3ϵ/4) I, √(ϵ/4) X, √(ϵ/4) Y, √(ϵ/4) Z}`.
    pub fn depolarizing(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let id = C64::new((1.0 - 0.75 * epsilon).sqrt(), 0.0);
        let p = C64::new((0.25 * epsilon).sqrt(), 0.0);
        let kraus = vec![
            m2([1.0, 0.0, 0.0, 1.0]) * id,
            m2([0.0, 1.0, 1.0, 0.0]) * p,
            pauli_y() * p,
            m2([1.0, 0.0, 0.0, -1.0]) * p,
        ];
        Ok(Self { kind: NoiseKind::Depolarizing, epsilon, kraus })
    }

    /// Kraus operators `A₀ = [[1,0],[0,√(1−ϵ)]]`, `A₁ = [[0,√ϵ],[0,0]]`.
    pub fn amplitude_damping(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let kraus = vec![
            m2([1.0, 0.0, 0.0, (1.0 - epsilon).sqrt()]),
            m2([0.0, epsilon.sqrt(), 0.0, 0.0]),
        ];
        Ok(Self { kind: NoiseKind::AmplitudeDamping, epsilon, kraus })
    }

    pub fn named(kind: NoiseKind, epsilon: f64) -> Result<Self> {
        match kind {
            NoiseKind::Dephasing => Self::dephasing(epsilon),
            NoiseKind::Depolarizing => Self::depolarizing(epsilon),
            NoiseKind::AmplitudeDamping => Self::amplitude_damping(epsilon),
            NoiseKind::Custom => Err(Error::InvalidNoise(
                "custom channels are built from Kraus operators".into(),
            )),
        }
    }

    /// A channel from explicit 2×2 Kraus operators, applied before the gate.
    pub fn custom(kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidNoise("no Kraus operators".into()));
        }
        if kraus.iter().any(|k| k.nrows() != 2 || k.ncols() != 2) {
            return Err(Error::InvalidNoise("Kraus operators must be 2x2".into()));
        }
        let channel = Self { kind: NoiseKind::Custom, epsilon: 0.0, kraus };
        let defect = channel.completeness_defect();
        if defect > CUSTOM_COMPLETENESS_TOLERANCE {
            return Err(Error::InvalidNoise(format!(
                "Kraus operators are not complete (defect {defect:e})"
            )));
        }
        Ok(channel)
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Largest entry of `Σ E_k† E_k − I`.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(2, 2), |acc, e| acc + e.adjoint() * e);
        (sum - CMatrix::identity(2, 2)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Whether the channel acts after the gate rather than before it.
    pub fn acts_after_gate(&self) -> bool {
        self.kind == NoiseKind::Depolarizing
    }

    /// Applies the channel to `qubit` of `rho`.
    pub fn apply(&self, rho: &DensityMatrix, qubit: usize) -> Result<DensityMatrix> {
        match self.kind {
            NoiseKind::Depolarizing => {
                let mixed = rho.replace_with_maximally_mixed(qubit)?;
                let matrix = rho.matrix() * C64::new(1.0 - self.epsilon, 0.0)
                    + mixed.matrix() * C64::new(self.epsilon, 0.0);
                Ok(DensityMatrix::from_matrix_unchecked(matrix))
            }
            _ => self.apply_kraus_sum(rho, qubit),
        }
    }

    /// `Σ_k E_k ρ E_k†` with each `E_k` embedded on `qubit`.
    pub fn apply_kraus_sum(&self, rho: &DensityMatrix, qubit: usize) -> Result<DensityMatrix> {
        let ops = self
            .kraus
            .iter()
            .map(|e| embed_operator(e, &[qubit], rho.num_qubits()))
            .collect::<Result<Vec<_>>>()?;
        rho.apply_kraus(&ops)
    }
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    kind: NoiseKind,
    #[serde(default)]
    epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kraus: Option<Vec<[[[f64; 2]; 2]; 2]>>,
}

impl From<NoiseChannel> for ChannelRepr {
    fn from(ch: NoiseChannel) -> Self {
        let kraus = (ch.kind == NoiseKind::Custom).then(|| {
            ch.kraus
                .iter()
                .map(|m| {
                    let e = |r, c| {
                        let z: C64 = m[(r, c)];
                        [z.re, z.im]
                    };
                    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
                })
                .collect()
        });
        ChannelRepr { kind: ch.kind, epsilon: ch.epsilon, kraus }
    }
}

impl TryFrom<ChannelRepr> for NoiseChannel {
    type Error = Error;

    fn try_from(r: ChannelRepr) -> Result<Self> {
        match (r.kind, r.kraus) {
            (NoiseKind::Custom, Some(ops)) => NoiseChannel::custom(
                ops.iter()
                    .map(|rows| {
                        CMatrix::from_fn(2, 2, |i, j| C64::new(rows[i][j][0], rows[i][j][1]))
                    })
                    .collect(),
            ),
            (NoiseKind::Custom, None) => {
                Err(Error::InvalidNoise("custom channel needs `kraus`".into()))
            }
            (kind, _) => NoiseChannel::named(kind, r.epsilon),
        }
    }
}

/// Per-target channels for one gate: slot `k` acts on the gate's `k`-th target.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    slots: Vec<Option<NoiseChannel>>,
}

impl NoiseSpec {
    pub const MAX_SLOTS: usize = 2;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(channel: NoiseChannel) -> Self {
        Self { slots: vec![Some(channel)] }
    }

    pub fn pair(first: Option<NoiseChannel>, second: Option<NoiseChannel>) -> Self {
        let mut spec = Self { slots: vec![first, second] };
        spec.trim();
        spec
    }

    /// The same channel on each of `arity` slots.
    pub fn uniform(channel: &NoiseChannel, arity: usize) -> Self {
        Self { slots: vec![Some(channel.clone()); arity.min(Self::MAX_SLOTS)] }
    }

    pub fn set_slot(&mut self, slot: usize, channel: Option<NoiseChannel>) -> Result<()> {
        if slot >= Self::MAX_SLOTS {
            return Err(Error::NoiseArity { slots: slot + 1, arity: Self::MAX_SLOTS });
        }
        if self.slots.len() <= slot {
            self.slots.resize(slot + 1, None);
        }
        self.slots[slot] = channel;
        self.trim();
        Ok(())
    }

    fn trim(&mut self) {
        while matches!(self.slots.last(), Some(None)) {
            self.slots.pop();
        }
    }

    pub fn slot(&self, slot: usize) -> Option<&NoiseChannel> {
        self.slots.get(slot).and_then(Option::as_ref)
    }

    /// One past the highest occupied slot.
    pub fn slot_count(&self) -> usize {
        self.slots.iter().rposition(Option::is_some).map_or(0, |p| p + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.slot_count() == 0
    }

    pub fn channels(&self) -> impl Iterator<Item = (usize, &NoiseChannel)> {
        self.slots.iter().enumerate().filter_map(|(k, c)| c.as_ref().map(|c| (k, c)))
    }
}

/// `ρ → U ∘ ε(ρ)` for a gate with per-target noise.
pub fn apply_noisy_gate(
    rho: &DensityMatrix,
    gate: &Gate,
    targets: &[usize],
    spec: &NoiseSpec,
) -> Result<DensityMatrix> {
    let unitary = gate_tensor_on(gate, targets, rho.num_qubits())?;
    if spec.slot_count() > gate.arity() {
        return Err(Error::NoiseArity { slots: spec.slot_count(), arity: gate.arity() });
    }
    let mut out = rho.clone();
    for (slot, channel) in spec.channels().filter(|(_, c)| !c.acts_after_gate()) {
        out = channel.apply(&out, targets[slot])?;
    }
    out = out.apply_unitary(&unitary)?;
    for (slot, channel) in spec.channels().filter(|(_, c)| c.acts_after_gate()) {
        out = channel.apply(&out, targets[slot])?;
    }
    Ok(out)
}
