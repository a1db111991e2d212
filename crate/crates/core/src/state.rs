//! Pure and mixed register states.
//!
//! Basis-state indices follow the little-endian convention: bit `k` of an index
//! is the value of qubit `k`. All operations return new values; states are
//! never mutated in place through the public API.

use serde::Serialize;

use crate::{CMatrix, CVector, Error, Result, C64, STATE_TOLERANCE};

/// Probability below which a measurement branch is considered impossible.
pub const ZERO_BRANCH_PROBABILITY: f64 = 1e-14;

/// Eigenvalues of trace-normalized PSD matrices at or below this value are
/// rounding noise and are treated as exact zeros when taking square roots.
const EIGEN_NOISE_FLOOR: f64 = 1e-13;

#[inline]
pub(crate) fn bit(index: usize, qubit: usize) -> usize {
    (index >> qubit) & 1
}

fn checked_num_qubits(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidState(format!(
            "dimension {dim} is not a power of two >= 2"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn check_qubit(qubit: usize, num_qubits: usize) -> Result<()> {
    if qubit >= num_qubits {
        return Err(Error::QubitOutOfRange { index: qubit, num_qubits });
    }
    Ok(())
}

/// Checks that `order` is a permutation of `0..n`.
fn check_permutation(order: &[usize], num_qubits: usize) -> Result<()> {
    if order.len() != num_qubits {
        return Err(Error::InvalidTargets(format!(
            "permutation has {} entries for {num_qubits} qubits",
            order.len()
        )));
    }
    let mut seen = vec![false; num_qubits];
    for &q in order {
        check_qubit(q, num_qubits)?;
        if std::mem::replace(&mut seen[q], true) {
            return Err(Error::InvalidTargets(format!("qubit {q} repeated in permutation")));
        }
    }
    Ok(())
}

/// Index map for [`PureState::permute_qubits`]: entry `i` is where basis state
/// `i` lands.
fn permuted_indices(order: &[usize]) -> Vec<usize> {
    let dim = 1usize << order.len();
    (0..dim)
        .map(|i| {
            order
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &dest)| acc | (bit(i, k) << dest))
        })
        .collect()
}

/// A wave function over `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: CVector,
}

impl PureState {
    /// The all-zero basis state `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidState("a register needs at least one qubit".into()));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidState(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = CVector::zeros(dim);
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    /// Builds a state from raw amplitudes, checking length and normalization.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let num_qubits = checked_num_qubits(amplitudes.len())?;
        let state = Self { num_qubits, amplitudes: CVector::from_vec(amplitudes) };
        state.validate()?;
        Ok(state)
    }

    pub(crate) fn from_vector_unchecked(amplitudes: CVector) -> Self {
        let num_qubits = amplitudes.len().trailing_zeros() as usize;
        Self { num_qubits, amplitudes }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn validate(&self) -> Result<()> {
        if self.amplitudes.len() != 1usize << self.num_qubits {
            return Err(Error::InvalidState("amplitude count does not match qubit count".into()));
        }
        let norm = self.norm();
        if (norm - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn to_density(&self) -> DensityMatrix {
        let matrix = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix { num_qubits: self.num_qubits, matrix }
    }

    /// Applies a full-register operator.
    pub fn apply_unitary(&self, unitary: &CMatrix) -> Result<PureState> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { left: unitary.nrows(), right: self.dim() });
        }
        Ok(Self { num_qubits: self.num_qubits, amplitudes: unitary * &self.amplitudes })
    }

    /// `self ⊗ other`, with `self` on the more significant qubits.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let amplitudes = self.amplitudes.kronecker(&other.amplitudes);
        Self { num_qubits: self.num_qubits + other.num_qubits, amplitudes }
    }

    /// Relabels qubits: local qubit `k` becomes qubit `order[k]`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<PureState> {
        check_permutation(order, self.num_qubits)?;
        let map = permuted_indices(order);
        let mut amplitudes = CVector::zeros(self.dim());
        for (i, &j) in map.iter().enumerate() {
            amplitudes[j] = self.amplitudes[i];
        }
        Ok(Self { num_qubits: self.num_qubits, amplitudes })
    }

    /// Born probability of reading 0 on `qubit`.
    pub fn probability_zero(&self, qubit: usize) -> Result<f64> {
        check_qubit(qubit, self.num_qubits)?;
        Ok(self.branch_probability(qubit, 0))
    }

    fn branch_probability(&self, qubit: usize, outcome: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| bit(*i, qubit) == outcome)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projective Z measurement. Returns `(outcome, collapsed state, P(0))`.
    pub fn measure(&self, qubit: usize, sample: f64) -> Result<(u8, PureState, f64)> {
        check_qubit(qubit, self.num_qubits)?;
        let p0 = self.branch_probability(qubit, 0);
        let p1 = self.branch_probability(qubit, 1);
        let outcome = usize::from(sample >= p0);
        let p_out = if outcome == 0 { p0 } else { p1 };
        if p_out < ZERO_BRANCH_PROBABILITY {
            return Err(Error::ZeroProbabilityBranch {
                qubit,
                outcome: outcome as u8,
                probability: p_out,
            });
        }
        let scale = 1.0 / p_out.sqrt();
        let amplitudes = CVector::from_iterator(
            self.dim(),
            self.amplitudes.iter().enumerate().map(|(i, a)| {
                if bit(i, qubit) == outcome {
                    a * scale
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        );
        Ok((outcome as u8, Self { num_qubits: self.num_qubits, amplitudes }, p0))
    }
}

/// A mixed state `ρ` over `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Ok(PureState::zero(num_qubits)?.to_density())
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidState("a register needs at least one qubit".into()));
        }
        let dim = 1usize << num_qubits;
        let matrix = CMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0);
        Ok(Self { num_qubits, matrix })
    }

    /// Builds a density matrix, checking Hermiticity, trace and positivity.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let num_qubits = checked_num_qubits(matrix.nrows())?;
        let rho = Self { num_qubits, matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        let num_qubits = matrix.nrows().trailing_zeros() as usize;
        Self { num_qubits, matrix }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        crate::linalg::hermitian_eigen(&self.matrix).map(|(v, _)| v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() != 1usize << self.num_qubits {
            return Err(Error::InvalidState("matrix dimension does not match qubit count".into()));
        }
        let herm_defect = (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm_defect > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm_defect:e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > STATE_TOLERANCE || tr.im.abs() > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = self.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -STATE_TOLERANCE {
            return Err(Error::NotPositiveSemidefinite(min_eig));
        }
        Ok(())
    }

    /// `U ρ U†` for a full-register operator `U`.
    pub fn apply_unitary(&self, unitary: &CMatrix) -> Result<DensityMatrix> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { left: unitary.nrows(), right: self.dim() });
        }
        let matrix = unitary * &self.matrix * unitary.adjoint();
        Ok(Self { num_qubits: self.num_qubits, matrix })
    }

    /// `Σ_k E_k ρ E_k†` for full-register operators `E_k`.
    pub fn apply_kraus(&self, ops: &[CMatrix]) -> Result<DensityMatrix> {
        let mut matrix = CMatrix::zeros(self.dim(), self.dim());
        for op in ops {
            if op.nrows() != self.dim() || op.ncols() != self.dim() {
                return Err(Error::DimensionMismatch { left: op.nrows(), right: self.dim() });
            }
            matrix += op * &self.matrix * op.adjoint();
        }
        Ok(Self { num_qubits: self.num_qubits, matrix })
    }

    /// Replaces the marginal of `qubit` by `I/2`, leaving the rest of the
    /// register as `tr_qubit(ρ)`: the result is `I/2 ⊗ tr_qubit(ρ)` in the
    /// original qubit order.
    pub fn replace_with_maximally_mixed(&self, qubit: usize) -> Result<DensityMatrix> {
        check_qubit(qubit, self.num_qubits)?;
        let mask = 1usize << qubit;
        let dim = self.dim();
        let matrix = CMatrix::from_fn(dim, dim, |i, j| {
            if (i ^ j) & mask != 0 {
                return C64::new(0.0, 0.0);
            }
            let (i0, j0) = (i & !mask, j & !mask);
            (self.matrix[(i0, j0)] + self.matrix[(i0 | mask, j0 | mask)]) * 0.5
        });
        Ok(Self { num_qubits: self.num_qubits, matrix })
    }

    /// `self ⊗ other`, with `self` on the more significant qubits.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self {
            num_qubits: self.num_qubits + other.num_qubits,
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// Relabels qubits: local qubit `k` becomes qubit `order[k]`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<DensityMatrix> {
        check_permutation(order, self.num_qubits)?;
        let map = permuted_indices(order);
        let dim = self.dim();
        let mut matrix = CMatrix::zeros(dim, dim);
        for (c, &jc) in map.iter().enumerate() {
            for (r, &jr) in map.iter().enumerate() {
                matrix[(jr, jc)] = self.matrix[(r, c)];
            }
        }
        Ok(Self { num_qubits: self.num_qubits, matrix })
    }

    /// Reduced state on the sorted, distinct qubits in `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::InvalidTargets("partial trace must keep at least one qubit".into()));
        }
        for w in keep.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidTargets(
                    "kept qubits must be sorted and distinct".into(),
                ));
            }
        }
        for &q in keep {
            check_qubit(q, self.num_qubits)?;
        }
        let traced: Vec<usize> = (0..self.num_qubits).filter(|q| !keep.contains(q)).collect();
        let scatter = |bits: usize, positions: &[usize]| {
            positions
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, &q)| acc | (bit(bits, k) << q))
        };
        let kept_dim = 1usize << keep.len();
        let traced_dim = 1usize << traced.len();
        let kept_index: Vec<usize> = (0..kept_dim).map(|r| scatter(r, keep)).collect();
        let traced_index: Vec<usize> = (0..traced_dim).map(|t| scatter(t, &traced)).collect();
        let matrix = CMatrix::from_fn(kept_dim, kept_dim, |r, c| {
            traced_index
                .iter()
                .map(|&t| self.matrix[(kept_index[r] | t, kept_index[c] | t)])
                .sum()
        });
        Ok(Self { num_qubits: keep.len(), matrix })
    }

    /// Born probability of reading 0 on `qubit`.
    pub fn probability_zero(&self, qubit: usize) -> Result<f64> {
        check_qubit(qubit, self.num_qubits)?;
        Ok(self.branch_probability(qubit, 0))
    }

    fn branch_probability(&self, qubit: usize, outcome: usize) -> f64 {
        (0..self.dim())
            .filter(|&i| bit(i, qubit) == outcome)
            .map(|i| self.matrix[(i, i)].re)
            .sum::<f64>()
            .max(0.0)
    }

    /// Projective Z measurement, `P ρ P / tr(P ρ)`. Returns
    /// `(outcome, collapsed state, P(0))`.
    pub fn measure(&self, qubit: usize, sample: f64) -> Result<(u8, DensityMatrix, f64)> {
        check_qubit(qubit, self.num_qubits)?;
        let p0 = self.branch_probability(qubit, 0);
        let p1 = self.branch_probability(qubit, 1);
        let outcome = usize::from(sample >= p0);
        let p_out = if outcome == 0 { p0 } else { p1 };
        if p_out < ZERO_BRANCH_PROBABILITY {
            return Err(Error::ZeroProbabilityBranch {
                qubit,
                outcome: outcome as u8,
                probability: p_out,
            });
        }
        let dim = self.dim();
        let matrix = CMatrix::from_fn(dim, dim, |i, j| {
            if bit(i, qubit) == outcome && bit(j, qubit) == outcome {
                self.matrix[(i, j)] / p_out
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok((outcome as u8, Self { num_qubits: self.num_qubits, matrix }, p0))
    }
}

/// Eigenvalues and eigenvectors of a PSD matrix with rounding noise removed.
fn psd_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let (raw, vectors) = crate::linalg::hermitian_eigen(m)?;
    let mut values = Vec::with_capacity(raw.len());
    for v in raw {
        if v < -STATE_TOLERANCE {
            return Err(Error::NotPositiveSemidefinite(v));
        }
        values.push(if v <= EIGEN_NOISE_FLOOR { 0.0 } else { v });
    }
    Ok((values, vectors))
}

fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = psd_eigen(m)?;
    let mut scaled = vectors.clone();
    for (k, v) in values.iter().enumerate() {
        let s = v.sqrt();
        scaled.column_mut(k).scale_mut(s);
    }
    Ok(scaled * vectors.adjoint())
}

/// Either representation of a register state.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Pure(PureState),
    Density(DensityMatrix),
}

impl State {
    pub fn num_qubits(&self) -> usize {
        match self {
            State::Pure(p) => p.num_qubits(),
            State::Density(d) => d.num_qubits(),
        }
    }

    pub fn is_density(&self) -> bool {
        matches!(self, State::Density(_))
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            State::Pure(p) => Some(p),
            State::Density(_) => None,
        }
    }

    pub fn as_density(&self) -> Option<&DensityMatrix> {
        match self {
            State::Density(d) => Some(d),
            State::Pure(_) => None,
        }
    }

    /// The density matrix of this state, forming `|ψ⟩⟨ψ|` for pure states.
    pub fn to_density(&self) -> DensityMatrix {
        match self {
            State::Pure(p) => p.to_density(),
            State::Density(d) => d.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            State::Pure(p) => p.validate(),
            State::Density(d) => d.validate(),
        }
    }

    pub fn apply_unitary(&self, unitary: &CMatrix) -> Result<State> {
        Ok(match self {
            State::Pure(p) => State::Pure(p.apply_unitary(unitary)?),
            State::Density(d) => State::Density(d.apply_unitary(unitary)?),
        })
    }

    pub fn permute_qubits(&self, order: &[usize]) -> Result<State> {
        Ok(match self {
            State::Pure(p) => State::Pure(p.permute_qubits(order)?),
            State::Density(d) => State::Density(d.permute_qubits(order)?),
        })
    }

    pub fn probability_zero(&self, qubit: usize) -> Result<f64> {
        match self {
            State::Pure(p) => p.probability_zero(qubit),
            State::Density(d) => d.probability_zero(qubit),
        }
    }
}

/// Outcome of one mid-circuit measurement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub qubit_index: usize,
    pub classical_bit: usize,
    pub outcome: u8,
    pub probability_of_outcome: f64,
}

/// `|ψ⟩⟨ψ|`.
pub fn pure_to_density(psi: &PureState) -> DensityMatrix {
    psi.to_density()
}

/// Kronecker product with `a` on the more significant qubits.
pub fn tensor_product(a: &State, b: &State) -> Result<State> {
    match (a, b) {
        (State::Pure(a), State::Pure(b)) => Ok(State::Pure(a.tensor(b))),
        (State::Density(a), State::Density(b)) => Ok(State::Density(a.tensor(b))),
        _ => Err(Error::RepresentationMismatch),
    }
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

/// Measures `qubit`; outcome 0 is chosen when `sample < P(0)`. Returns
/// `(outcome, collapsed state, P(0))`.
pub fn measure_qubit(state: &State, qubit: usize, sample: f64) -> Result<(u8, State, f64)> {
    match state {
        State::Pure(p) => p.measure(qubit, sample).map(|(o, s, p0)| (o, State::Pure(s), p0)),
        State::Density(d) => d.measure(qubit, sample).map(|(o, s, p0)| (o, State::Density(s), p0)),
    }
}

/// Uhlmann fidelity `(tr √(√B A √B))²`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    let sqrt_b = psd_sqrt(&b.matrix)?;
    let inner = &sqrt_b * &a.matrix * &sqrt_b;
    let (values, _) = psd_eigen(&inner)?;
    let trace_sqrt: f64 = values.iter().map(|v| v.sqrt()).sum();
    Ok(trace_sqrt * trace_sqrt)
}


#[cfg(test)]
mod tests {
    use super::test_util::*;
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn plus() -> PureState {
        let h = 0.5f64.sqrt();
        PureState::from_amplitudes(vec![c(h), c(h)]).unwrap()
    }

    #[test]
    fn density_of_basis_and_plus() {
        let rho = PureState::zero(1).unwrap().to_density();
        assert_eq!(rho.matrix(), &CMatrix::from_row_slice(2, 2, &[c(1.), c(0.), c(0.), c(0.)]));
        let rho = plus().to_density();
        let expected = CMatrix::from_element(2, 2, c(0.5));
        assert!(max_abs_diff(rho.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn random_pure_density_has_unit_purity() {
        let mut r = rng(11);
        let rho = pure_to_density(&random_pure(3, &mut r));
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        rho.validate().unwrap();
    }

    #[test]
    fn tensor_of_basis_states() {
        let zero = State::Pure(PureState::zero(1).unwrap());
        let one = State::Pure(PureState::basis(1, 1).unwrap());
        let s = tensor_product(&zero, &one).unwrap();
        let psi = s.as_pure().unwrap();
        assert_eq!(psi.num_qubits(), 2);
        assert_eq!(psi.amplitudes()[1], c(1.0));

        let a = State::Density(DensityMatrix::zero(1).unwrap());
        let b = State::Density(DensityMatrix::maximally_mixed(1).unwrap());
        let rho = tensor_product(&a, &b).unwrap();
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.5), c(0.5), c(0.), c(0.)]));
        assert!(max_abs_diff(rho.as_density().unwrap().matrix(), &expected) < 1e-15);
    }

    #[test]
    fn tensor_matches_double_loop_oracle() {
        let mut r = rng(5);
        let a = random_density(2, &mut r);
        let b = random_density(2, &mut r);
        let got = a.tensor(&b);
        let mut oracle = CMatrix::zeros(16, 16);
        for i1 in 0..4 {
            for j1 in 0..4 {
                for i2 in 0..4 {
                    for j2 in 0..4 {
                        oracle[(i1 * 4 + i2, j1 * 4 + j2)] = a.matrix()[(i1, j1)] * b.matrix()[(i2, j2)];
                    }
                }
            }
        }
        assert!(max_abs_diff(got.matrix(), &oracle) < 1e-15);

        let pa = random_pure(2, &mut r);
        let pb = random_pure(2, &mut r);
        let got = pa.tensor(&pb);
        for i1 in 0..4 {
            for i2 in 0..4 {
                let expected = pa.amplitudes()[i1] * pb.amplitudes()[i2];
                assert!((got.amplitudes()[i1 * 4 + i2] - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn tensor_rejects_mixed_representations() {
        let a = State::Pure(PureState::zero(1).unwrap());
        let b = State::Density(DensityMatrix::zero(1).unwrap());
        assert!(matches!(tensor_product(&a, &b), Err(Error::RepresentationMismatch)));
    }

    fn bell() -> PureState {
        let h = 0.5f64.sqrt();
        PureState::from_amplitudes(vec![c(h), c(0.), c(0.), c(h)]).unwrap()
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = bell().to_density().partial_trace(&[0]).unwrap();
        let expected = CMatrix::identity(2, 2) * c(0.5);
        assert!(max_abs_diff(rho.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn product_marginal_uses_little_endian_order() {
        // |01⟩: qubit 1 = 0, qubit 0 = 1
        let rho = PureState::basis(2, 1).unwrap().to_density();
        let kept = rho.partial_trace(&[1]).unwrap();
        assert_eq!(kept.matrix()[(0, 0)], c(1.0));
        assert_eq!(kept.matrix()[(1, 1)], c(0.0));
        let kept = rho.partial_trace(&[0]).unwrap();
        assert_eq!(kept.matrix()[(1, 1)], c(1.0));
    }

    /// `Σ_t K_t ρ K_t†` with `K_t = I ⊗ ⟨t| ⊗ I` built from Kronecker products.
    #[test]
    fn partial_trace_matches_projection_oracle() {
        let mut r = rng(9);
        let rho = random_density(3, &mut r);
        let got = rho.partial_trace(&[0, 2]).unwrap();
        let id = CMatrix::identity(2, 2);
        let mut oracle = CMatrix::zeros(4, 4);
        for t in 0..2 {
            let mut bra = CMatrix::zeros(1, 2);
            bra[(0, t)] = c(1.0);
            // significance order: qubit 2, qubit 1, qubit 0
            let k = id.kronecker(&bra).kronecker(&id);
            oracle += &k * rho.matrix() * k.adjoint();
        }
        assert!(max_abs_diff(got.matrix(), &oracle) < 1e-12);
        assert!((got.trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn partial_trace_rejects_bad_keep() {
        let rho = DensityMatrix::zero(2).unwrap();
        assert!(rho.partial_trace(&[]).is_err());
        assert!(rho.partial_trace(&[1, 1]).is_err());
        assert!(rho.partial_trace(&[1, 0]).is_err());
        assert!(rho.partial_trace(&[2]).is_err());
    }

    #[test]
    fn measure_basis_and_plus() {
        let s = State::Pure(PureState::zero(1).unwrap());
        let (o, post, p) = measure_qubit(&s, 0, 0.999).unwrap();
        assert_eq!((o, p), (0, 1.0));
        assert_eq!(post, s);

        let (o, post, p) = measure_qubit(&State::Pure(plus()), 0, 0.25).unwrap();
        assert_eq!(o, 0);
        assert!((p - 0.5).abs() < 1e-15);
        assert!((post.as_pure().unwrap().amplitudes()[0] - c(1.0)).norm() < 1e-15);
        post.validate().unwrap();

        let (o, _, _) = measure_qubit(&State::Pure(plus()), 0, 0.75).unwrap();
        assert_eq!(o, 1);
    }

    #[test]
    fn measure_probability_matches_projector_oracle() {
        let mut r = rng(21);
        let rho = random_density(3, &mut r);
        let id = CMatrix::identity(2, 2);
        let p0_local = CMatrix::from_row_slice(2, 2, &[c(1.), c(0.), c(0.), c(0.)]);
        let projector = id.kronecker(&p0_local).kronecker(&id);
        let oracle = (&projector * rho.matrix()).trace().re;
        let (_, post, p0) = rho.measure(1, 0.3).unwrap();
        assert!((p0 - oracle).abs() < 1e-12);
        post.validate().unwrap();
    }

    #[test]
    fn measure_onto_impossible_branch_fails() {
        // p0 = 1e-16: sample 0.0 selects outcome 0
        let eps: f64 = 1e-8;
        let amp = (1.0 - eps * eps).sqrt();
        let psi = PureState::from_amplitudes(vec![c(eps), c(amp)]).unwrap();
        assert!(matches!(
            psi.measure(0, 0.0),
            Err(Error::ZeroProbabilityBranch { outcome: 0, .. })
        ));
        assert!(psi.measure(1, 0.0).is_err());
    }

    #[test]
    fn fidelity_basics() {
        let mut r = rng(3);
        let rho = random_density(2, &mut r);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
        let zero = DensityMatrix::zero(1).unwrap();
        let one = PureState::basis(1, 1).unwrap().to_density();
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        assert!(matches!(
            fidelity(&zero, &DensityMatrix::zero(2).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fidelity_of_pure_states_is_overlap() {
        let mut r = rng(4);
        for _ in 0..5 {
            let a = random_pure(3, &mut r);
            let b = random_pure(3, &mut r);
            let overlap = a.inner(&b).unwrap().norm_sqr();
            let f = fidelity(&a.to_density(), &b.to_density()).unwrap();
            assert!((f - overlap).abs() < 1e-9, "{f} vs {overlap}");
        }
    }

    #[test]
    fn permutation_round_trip() {
        let mut r = rng(8);
        let psi = random_pure(3, &mut r);
        let order = [2, 0, 1];
        let inverse = [1, 2, 0];
        let back = psi.permute_qubits(&order).unwrap().permute_qubits(&inverse).unwrap();
        assert_eq!(back, psi);
        // qubit 0 → position 2: |001⟩ becomes |100⟩
        let moved = PureState::basis(3, 1).unwrap().permute_qubits(&order).unwrap();
        assert_eq!(moved.amplitudes()[4], c(1.0));
        assert!(psi.permute_qubits(&[0, 0, 1]).is_err());
    }

    #[test]
    fn replace_with_maximally_mixed_on_product_state() {
        // |1⟩ ⊗ |0⟩ on (q1, q0); replacing q1 leaves I/2 ⊗ |0⟩⟨0|
        let rho = PureState::basis(2, 2).unwrap().to_density();
        let out = rho.replace_with_maximally_mixed(1).unwrap();
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.5), c(0.), c(0.5), c(0.)]));
        assert!(max_abs_diff(out.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn invalid_states_rejected() {
        assert!(PureState::from_amplitudes(vec![c(1.0), c(1.0)]).is_err());
        assert!(PureState::from_amplitudes(vec![c(1.0), c(0.0), c(0.0)]).is_err());
        let not_psd = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5), c(-0.5)]));
        assert!(matches!(
            DensityMatrix::from_matrix(not_psd),
            Err(Error::NotPositiveSemidefinite(_))
        ));
    }
}
