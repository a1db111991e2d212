//! Matrix product state engine.
//!
//! Site `k` holds qubit `k` as two `χ_left × χ_right` matrices, one per
//! physical value. The chain is kept in mixed-canonical form around an
//! orthogonality center, so the singular values found when splitting a
//! two-site block at the center are Schmidt coefficients of the full state and
//! truncation thresholds are absolute.
//!
//! ```text
//!   A[0] ── A[1] ── A[2] ── … ── A[n-1]
//!    │       │       │             │
//!   q0      q1      q2           q(n-1)
//! ```

use super::{check_config, Classical, EngineKind, RunConfig, RunResult};
use crate::gates::make_gate;
use crate::state::ZERO_BRANCH_PROBABILITY;
use crate::{
    CMatrix, CVector, Circuit, Error, Instruction, PureState, Result, State, C64,
};

#[derive(Clone, Debug)]
pub struct Mps {
    sites: Vec<[CMatrix; 2]>,
    center: usize,
    threshold: f64,
    max_bond: Option<usize>,
    peak_bond: usize,
}

impl Mps {
    /// `|0…0⟩` on `num_qubits` sites, all bonds of dimension 1.
    pub fn new(num_qubits: usize, threshold: f64, max_bond: Option<usize>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidState("a register needs at least one qubit".into()));
        }
        if max_bond == Some(0) {
            return Err(Error::InvalidConfig("MPS bond cap must be at least 1".into()));
        }
        let zero = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let site = [zero, CMatrix::zeros(1, 1)];
        Ok(Self { sites: vec![site; num_qubits], center: 0, threshold, max_bond, peak_bond: 1 })
    }

    pub fn num_qubits(&self) -> usize {
        self.sites.len()
    }

    /// Dimension of the bond between sites `k` and `k+1`, for each `k`.
    pub fn bond_dimensions(&self) -> Vec<usize> {
        self.sites[..self.sites.len() - 1].iter().map(|s| s[0].ncols()).collect()
    }

    /// Largest bond dimension seen during the evolution so far.
    pub fn peak_bond_dimension(&self) -> usize {
        self.peak_bond
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits() {
            return Err(Error::QubitOutOfRange { index: qubit, num_qubits: self.num_qubits() });
        }
        Ok(())
    }

    pub fn apply_single(&mut self, qubit: usize, u: &CMatrix) -> Result<()> {
        self.check_qubit(qubit)?;
        if u.nrows() != 2 || u.ncols() != 2 {
            return Err(Error::InvalidTargets("single-site operator must be 2x2".into()));
        }
        let [a0, a1] = &self.sites[qubit];
        let new0 = a0 * u[(0, 0)] + a1 * u[(0, 1)];
        let new1 = a0 * u[(1, 0)] + a1 * u[(1, 1)];
        self.sites[qubit] = [new0, new1];
        Ok(())
    }

    /// Applies a 4×4 gate to `targets`, where the first target is the more
    /// significant local qubit. Distant targets are brought together with a
    /// chain of SWAPs and moved back afterwards.
    pub fn apply_two(&mut self, targets: [usize; 2], u: &CMatrix) -> Result<()> {
        let [a, b] = targets;
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::InvalidTargets(format!("qubit {a} repeated")));
        }
        if u.nrows() != 4 || u.ncols() != 4 {
            return Err(Error::InvalidTargets("two-site operator must be 4x4".into()));
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let swap = make_gate("SWAP", &[])?.matrix().clone();
        for k in (lo + 1..hi).rev() {
            self.apply_adjacent(k, &swap)?;
        }
        // the qubit from `hi` now sits at lo + 1
        if a < b {
            self.apply_adjacent(lo, u)?;
        } else {
            self.apply_adjacent(lo, &(&swap * u * &swap))?;
        }
        for k in lo + 1..hi {
            self.apply_adjacent(k, &swap)?;
        }
        Ok(())
    }

    /// Moves the orthogonality center to `site` by QR sweeps.
    fn move_center(&mut self, site: usize) {
        while self.center < site {
            let c = self.center;
            let (chi_l, chi_r) = self.sites[c][0].shape();
            let mut stacked = CMatrix::zeros(2 * chi_l, chi_r);
            for s in 0..2 {
                stacked.view_mut((s * chi_l, 0), (chi_l, chi_r)).copy_from(&self.sites[c][s]);
            }
            let qr = stacked.qr();
            let (q, r) = (qr.q(), qr.r());
            let k = q.ncols();
            self.sites[c] = [0, 1].map(|s| q.view((s * chi_l, 0), (chi_l, k)).into_owned());
            self.sites[c + 1] = [0, 1].map(|s| &r * &self.sites[c + 1][s]);
            self.center += 1;
        }
        while self.center > site {
            let c = self.center;
            let (chi_l, chi_r) = self.sites[c][0].shape();
            let mut wide = CMatrix::zeros(chi_l, 2 * chi_r);
            for s in 0..2 {
                wide.view_mut((0, s * chi_r), (chi_l, chi_r)).copy_from(&self.sites[c][s]);
            }
            // wide = L Q with Q row-orthonormal, via QR of the adjoint
            let qr = wide.adjoint().qr();
            let (q, r) = (qr.q().adjoint(), qr.r().adjoint());
            let k = q.nrows();
            self.sites[c] = [0, 1].map(|s| q.view((0, s * chi_r), (k, chi_r)).into_owned());
            self.sites[c - 1] = [0, 1].map(|s| &self.sites[c - 1][s] * &r);
            self.center -= 1;
        }
    }

    /// Applies `u` to sites `(left, left+1)`, `left` being the more
    /// significant local qubit, then re-splits with a truncated SVD.
    fn apply_adjacent(&mut self, left: usize, u: &CMatrix) -> Result<()> {
        self.move_center(left);
        let (chi_l, _) = self.sites[left][0].shape();
        let (_, chi_r) = self.sites[left + 1][0].shape();
        let theta: Vec<CMatrix> = (0..4)
            .map(|p| &self.sites[left][p >> 1] * &self.sites[left + 1][p & 1])
            .collect();
        let mut block = CMatrix::zeros(2 * chi_l, 2 * chi_r);
        for p_out in 0..4 {
            let (s1, s2) = (p_out >> 1, p_out & 1);
            let mut view = block.view_mut((s1 * chi_l, s2 * chi_r), (chi_l, chi_r));
            for (p_in, t) in theta.iter().enumerate() {
                let coeff = u[(p_out, p_in)];
                if coeff != C64::new(0.0, 0.0) {
                    view += t * coeff;
                }
            }
        }

        let (uu, singular, vt) = crate::linalg::svd(&block)?;
        let mut kept: Vec<usize> =
            (0..singular.len()).filter(|&i| singular[i] > self.threshold).collect();
        if let Some(cap) = self.max_bond {
            kept.truncate(cap);
        }
        if kept.is_empty() {
            return Err(Error::InvalidState(
                "all singular values fell below the truncation threshold".into(),
            ));
        }
        let norm = kept.iter().map(|&i| singular[i].powi(2)).sum::<f64>().sqrt();
        let k = kept.len();
        self.sites[left] = [0, 1].map(|s| {
            CMatrix::from_fn(chi_l, k, |a, m| uu[(s * chi_l + a, kept[m])])
        });
        self.sites[left + 1] = [0, 1].map(|s| {
            CMatrix::from_fn(k, chi_r, |m, b| {
                vt[(kept[m], s * chi_r + b)] * (singular[kept[m]] / norm)
            })
        });
        self.center = left + 1;
        self.peak_bond = self.peak_bond.max(k);
        Ok(())
    }

    /// Born probability of reading 0 on `qubit`.
    pub fn probability_zero(&mut self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        self.move_center(qubit);
        Ok(self.sites[qubit][0].norm_squared())
    }

    /// Projective measurement of `qubit`; returns `(outcome, P(0))`.
    pub fn measure(&mut self, qubit: usize, sample: f64) -> Result<(u8, f64)> {
        self.check_qubit(qubit)?;
        self.move_center(qubit);
        let p0 = self.sites[qubit][0].norm_squared();
        let p1 = self.sites[qubit][1].norm_squared();
        let total = p0 + p1;
        let (p0, p1) = (p0 / total, p1 / total);
        let outcome = usize::from(sample >= p0);
        let p_out = if outcome == 0 { p0 } else { p1 };
        if p_out < ZERO_BRANCH_PROBABILITY {
            return Err(Error::ZeroProbabilityBranch {
                qubit,
                outcome: outcome as u8,
                probability: p_out,
            });
        }
        let site = &mut self.sites[qubit];
        site[1 - outcome].fill(C64::new(0.0, 0.0));
        site[outcome] /= C64::new((p_out * total).sqrt(), 0.0);
        Ok((outcome as u8, p0))
    }

    /// Contracts the chain into a state vector (qubit 0 least significant).
    pub fn to_state(&self) -> PureState {
        let mut acc = {
            let [a0, a1] = &self.sites[0];
            let mut m = CMatrix::zeros(2, a0.ncols());
            m.row_mut(0).copy_from(&a0.row(0));
            m.row_mut(1).copy_from(&a1.row(0));
            m
        };
        for site in &self.sites[1..] {
            let lower = &acc * &site[0];
            let upper = &acc * &site[1];
            let rows = acc.nrows();
            let mut next = CMatrix::zeros(2 * rows, lower.ncols());
            next.rows_mut(0, rows).copy_from(&lower);
            next.rows_mut(rows, rows).copy_from(&upper);
            acc = next;
        }
        let mut v = CVector::from_column_slice(acc.column(0).as_slice());
        let norm = v.norm();
        v /= C64::new(norm, 0.0);
        PureState::from_vector_unchecked(v)
    }
}

/// Runs a noiseless circuit on a matrix product state.
pub fn run_mps(circuit: &Circuit, config: &RunConfig) -> Result<RunResult> {
    check_config(circuit, config, EngineKind::Mps)?;
    let mut mps = Mps::new(circuit.num_qubits(), config.mps_truncation_threshold, config.mps_max_bond)?;
    let mut classical = Classical::new(circuit, config.seed);
    for (index, instruction) in circuit.instructions().iter().enumerate() {
        match instruction {
            Instruction::Gate(app) => {
                if !classical.allows(app.condition) {
                    continue;
                }
                match app.targets[..] {
                    [q] => mps.apply_single(q, app.gate.matrix())?,
                    [a, b] => mps.apply_two([a, b], app.gate.matrix())?,
                    _ => unreachable!("validated arity"),
                }
                classical.gates_applied += 1;
            }
            Instruction::Measure { qubit, clbit } => {
                let (outcome, p0) = mps.measure(*qubit, classical.sample(index))?;
                classical.record(*qubit, *clbit, outcome, p0);
            }
        }
    }
    let peak = mps.peak_bond_dimension();
    Ok(classical.finish(State::Pure(mps.to_state()), circuit.depth(), Some(peak)))
}
