use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::Binomial;
use serde::Serialize;

use super::circuit::Circuit;
use super::gate::{support_qubits, Gate};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{CMatrix, C64, ONE, ZERO};
use crate::pauli::{PauliString, PauliSum};

/// Largest register held as a state vector.
pub const STATE_CAP: usize = 26;

/// Probability below which a post-selection is reported impossible.
pub const POSTSELECT_FLOOR: f64 = 1e-14;

/// A dense pure state over `n` qubits in little-endian basis order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

/// Shot estimate of a Pauli expectation, `mu ± sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotEstimate {
    pub mean: f64,
    pub sigma: f64,
    pub shots: usize,
}

fn check_cap(n: usize) -> Result<()> {
    if n > STATE_CAP {
        Err(Error::Resource(format!(
            "{n} qubits exceeds state-vector cap of {STATE_CAP}"
        )))
    } else {
        Ok(())
    }
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_cap(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::Dimension {
                expected: dim,
                found: index + 1,
            });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(StateVector { n, amps })
    }

    /// Wraps amplitudes, rescaling them to unit norm.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Argument(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let n = dim.trailing_zeros() as usize;
        check_cap(n)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < POSTSELECT_FLOOR {
            return Err(Error::Annihilation { norm });
        }
        Ok(StateVector {
            n,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn from_vector(v: &crate::linalg::CVector) -> Result<Self> {
        Self::from_amplitudes(v.iter().copied().collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn to_vector(&self) -> crate::linalg::CVector {
        crate::linalg::CVector::from_column_slice(&self.amps)
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `self ⊗ low`, with `low` on the least significant qubits.
    pub fn tensor(&self, low: &StateVector) -> Result<StateVector> {
        check_cap(self.n + low.n)?;
        let mut amps = Vec::with_capacity(self.dim() * low.dim());
        for a in &self.amps {
            for b in &low.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector {
            n: self.n + low.n,
            amps,
        })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        g.validate(self.n)?;
        apply_gate_unchecked(&mut self.amps, g);
        Ok(())
    }

    pub fn apply_circuit(&mut self, c: &Circuit, params: &[f64]) -> Result<()> {
        check_dim(self.n, c.n_qubits())?;
        for g in c.bind(params)? {
            apply_gate_unchecked(&mut self.amps, &g);
        }
        Ok(())
    }

    /// Applies `exp(-i theta P / 2)` directly:
    /// `cos(theta/2) psi - i sin(theta/2) P psi`.
    ///
    /// An identity `P` applies the global phase `exp(-i theta / 2)`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        check_dim(self.n, p.n_qubits())?;
        if !p.is_hermitian() {
            return Err(Error::Argument(
                "rotation generator must have a real phase".into(),
            ));
        }
        pauli_rotation_unchecked(&mut self.amps, p, theta);
        Ok(())
    }

    /// Applies `exp(-i theta P / 2)` through basis changes, a CNOT ladder
    /// onto the highest support qubit and a single `Rz`.
    pub fn apply_pauli_rotation_ladder(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        check_dim(self.n, p.n_qubits())?;
        for g in pauli_rotation_circuit(p, theta)? {
            self.apply_gate(&g)?;
        }
        Ok(())
    }

    /// `<psi|A|psi>`.
    pub fn expectation(&self, a: &PauliSum) -> Result<C64> {
        check_dim(self.n, a.n_qubits())?;
        let mut total = ZERO;
        for (p, c) in a.iter() {
            total += c * pauli_expectation(&self.amps, p);
        }
        Ok(total)
    }

    pub fn expectation_string(&self, p: &PauliString) -> Result<C64> {
        check_dim(self.n, p.n_qubits())?;
        Ok(pauli_expectation(&self.amps, p))
    }

    /// `<self|A|other>`.
    pub fn matrix_element(&self, a: &PauliSum, other: &StateVector) -> Result<C64> {
        check_dim(self.n, a.n_qubits())?;
        check_dim(self.dim(), other.dim())?;
        let av = a.apply(&other.amps);
        Ok(self.amps.iter().zip(&av).map(|(x, y)| x.conj() * y).sum())
    }

    /// Draws computational-basis outcomes.
    pub fn sample<R: Rng>(&self, shots: usize, rng: &mut R) -> Result<Vec<usize>> {
        sample_distribution(&self.probabilities(), shots, rng)
    }

    /// Estimates `<P>` from `shots` measurements after rotating each support
    /// qubit into the Z basis (`H` for X, `S†` then `H` for Y).
    ///
    /// Returns `mu` and `sigma = sqrt((1 - mu^2) / shots)`.
    pub fn sample_pauli<R: Rng>(
        &self,
        p: &PauliString,
        shots: usize,
        rng: &mut R,
    ) -> Result<ShotEstimate> {
        check_dim(self.n, p.n_qubits())?;
        if shots == 0 {
            return Err(Error::Argument("shot count must be at least 1".into()));
        }
        if !p.is_hermitian() {
            return Err(Error::Argument("measured Pauli must be Hermitian".into()));
        }
        let mut rotated = self.clone();
        for g in measurement_basis_change(p) {
            apply_gate_unchecked(&mut rotated.amps, &g);
        }
        let outcomes = rotated.sample(shots, rng)?;
        let sign = if p.phase() == 2 { -1.0 } else { 1.0 };
        let support = p.support() as usize;
        let total: f64 = outcomes
            .iter()
            .map(|&z| {
                if (z & support).count_ones() % 2 == 0 {
                    sign
                } else {
                    -sign
                }
            })
            .sum();
        let mean = total / shots as f64;
        Ok(ShotEstimate {
            mean,
            sigma: shot_sigma(mean, shots),
            shots,
        })
    }

    /// Projects `qubits` onto `outcomes` and renormalizes.
    ///
    /// Returns the projected state (same register width) and the outcome
    /// probability.
    pub fn postselect(&self, qubits: &[usize], outcomes: &[bool]) -> Result<(StateVector, f64)> {
        if qubits.len() != outcomes.len() {
            return Err(Error::Dimension {
                expected: qubits.len(),
                found: outcomes.len(),
            });
        }
        let mut qmask = 0usize;
        let mut want = 0usize;
        for (&q, &o) in qubits.iter().zip(outcomes) {
            if q >= self.n {
                return Err(Error::Dimension {
                    expected: self.n,
                    found: q + 1,
                });
            }
            if qmask >> q & 1 == 1 {
                return Err(Error::Argument(format!("qubit {q} listed twice")));
            }
            qmask |= 1 << q;
            want |= (o as usize) << q;
        }
        let mut amps = self.amps.clone();
        let mut prob = 0.0;
        for (b, a) in amps.iter_mut().enumerate() {
            if b & qmask == want {
                prob += a.norm_sqr();
            } else {
                *a = ZERO;
            }
        }
        if prob < POSTSELECT_FLOOR {
            return Err(Error::PostSelectionImpossible { probability: prob });
        }
        let s = prob.sqrt();
        amps.iter_mut().for_each(|a| *a /= s);
        Ok((StateVector { n: self.n, amps }, prob))
    }

    /// Keeps only the low `k` qubits after the high qubits were projected onto
    /// the basis state `high`.
    pub fn extract_low(&self, k: usize, high: usize) -> Result<StateVector> {
        let dim = 1usize << k;
        let start = high * dim;
        if k > self.n || start + dim > self.dim() {
            return Err(Error::Dimension {
                expected: self.n,
                found: k,
            });
        }
        StateVector::from_amplitudes(self.amps[start..start + dim].to_vec())
    }
}

pub(crate) fn shot_sigma(mean: f64, shots: usize) -> f64 {
    (1.0 / shots as f64 * (1.0 - mean * mean)).max(0.0).sqrt()
}

/// Multinomial outcome counts for `shots` draws, sampled as a chain of
/// conditional binomials so the cost does not grow with `shots`.
pub fn sample_counts<R: Rng>(probs: &[f64], shots: u64, rng: &mut R) -> Result<Vec<u64>> {
    let weights: Vec<f64> = probs.iter().map(|p| p.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Argument("cannot sample an empty distribution".into()));
    }
    let mut counts = vec![0u64; weights.len()];
    let mut left = shots;
    let mut mass = total;
    for (k, &w) in weights.iter().enumerate() {
        if left == 0 {
            break;
        }
        if k + 1 == weights.len() || w >= mass {
            counts[k] = left;
            break;
        }
        let p = (w / mass).clamp(0.0, 1.0);
        let c = Binomial::new(left, p)
            .map_err(|e| Error::Argument(format!("cannot sample distribution: {e}")))?
            .sample(rng);
        counts[k] = c;
        left -= c;
        mass -= w;
    }
    Ok(counts)
}

pub(crate) fn sample_distribution<R: Rng>(
    probs: &[f64],
    shots: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let weights: Vec<f64> = probs.iter().map(|p| p.max(0.0)).collect();
    let dist = WeightedIndex::new(&weights)
        .map_err(|e| Error::Argument(format!("cannot sample distribution: {e}")))?;
    Ok((0..shots).map(|_| dist.sample(rng)).collect())
}

/// Single-qubit gates that map `P` onto a product of `Z`s.
pub fn measurement_basis_change(p: &PauliString) -> Vec<Gate> {
    let mut gates = Vec::new();
    for q in support_qubits(p) {
        match p.get(q) {
            crate::pauli::Pauli::X => gates.push(Gate::H(q)),
            crate::pauli::Pauli::Y => {
                gates.push(Gate::Sdg(q));
                gates.push(Gate::H(q));
            }
            _ => {}
        }
    }
    gates
}

/// Gate sequence for `exp(-i theta P / 2)` built from basis changes, a CNOT
/// parity ladder and one `Rz`.
pub fn pauli_rotation_circuit(p: &PauliString, theta: f64) -> Result<Vec<Gate>> {
    if !p.is_hermitian() {
        return Err(Error::Argument(
            "rotation generator must have a real phase".into(),
        ));
    }
    let angle = if p.phase() == 2 { -theta } else { theta };
    let qs = support_qubits(p);
    let Some(&top) = qs.last() else {
        return Ok(vec![Gate::GlobalPhase(angle)]);
    };
    let change = measurement_basis_change(p);
    let mut gates = change.clone();
    for &q in &qs[..qs.len() - 1] {
        gates.push(Gate::Cnot {
            control: q,
            target: top,
        });
    }
    gates.push(Gate::Rz(top, angle));
    for &q in qs[..qs.len() - 1].iter().rev() {
        gates.push(Gate::Cnot {
            control: q,
            target: top,
        });
    }
    gates.extend(change.iter().rev().map(Gate::adjoint));
    Ok(gates)
}

fn pauli_expectation(amps: &[C64], p: &PauliString) -> C64 {
    let mut total = ZERO;
    for (b, a) in amps.iter().enumerate() {
        if *a == ZERO {
            continue;
        }
        let (row, amp) = p.action(b);
        total += amps[row].conj() * amp * a;
    }
    total
}

pub(crate) fn pauli_rotation_unchecked(amps: &mut [C64], p: &PauliString, theta: f64) {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new(0.0, -(theta / 2.0).sin());
    if p.is_identity() {
        let ph = c + s * p.phase_factor();
        amps.iter_mut().for_each(|a| *a *= ph);
        return;
    }
    let x = p.x_mask() as usize;
    // Pairs (b, b^x) mix; visit each pair once via its smaller index.
    for b in 0..amps.len() {
        let b2 = b ^ x;
        if x != 0 && b2 < b {
            continue;
        }
        let (r1, f1) = p.action(b);
        if x == 0 {
            amps[b] *= c + s * f1;
            continue;
        }
        let (_, f2) = p.action(b2);
        let a1 = amps[b];
        let a2 = amps[b2];
        // P|b> = f1 |b2>, P|b2> = f2 |b>.
        debug_assert_eq!(r1, b2);
        amps[b] = c * a1 + s * f2 * a2;
        amps[b2] = c * a2 + s * f1 * a1;
    }
}

#[inline]
fn apply_1q(amps: &mut [C64], q: usize, m: &CMatrix, ctrl_mask: usize, ctrl_val: usize) {
    let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let bit = 1usize << q;
    for b in 0..amps.len() {
        if b & bit != 0 || b & ctrl_mask != ctrl_val {
            continue;
        }
        let a0 = amps[b];
        let a1 = amps[b | bit];
        amps[b] = m00 * a0 + m01 * a1;
        amps[b | bit] = m10 * a0 + m11 * a1;
    }
}

/// Applies a `2^k` matrix to `targets` (least significant first) on the
/// subspace where `b & ctrl_mask == ctrl_val`.
pub(crate) fn apply_matrix(
    amps: &mut [C64],
    targets: &[usize],
    m: &CMatrix,
    ctrl_mask: usize,
    ctrl_val: usize,
) {
    if targets.len() == 1 {
        apply_1q(amps, targets[0], m, ctrl_mask, ctrl_val);
        return;
    }
    let k = targets.len();
    let d = 1usize << k;
    let tmask: usize = targets.iter().map(|&q| 1usize << q).sum();
    let offsets: Vec<usize> = (0..d)
        .map(|j| {
            (0..k)
                .filter(|&t| j >> t & 1 == 1)
                .map(|t| 1usize << targets[t])
                .sum()
        })
        .collect();
    let mut buf = vec![ZERO; d];
    for base in 0..amps.len() {
        if base & tmask != 0 || base & ctrl_mask != ctrl_val {
            continue;
        }
        for j in 0..d {
            buf[j] = amps[base | offsets[j]];
        }
        for r in 0..d {
            let mut acc = ZERO;
            for c in 0..d {
                acc += m[(r, c)] * buf[c];
            }
            amps[base | offsets[r]] = acc;
        }
    }
}

pub(crate) fn apply_gate_unchecked(amps: &mut [C64], g: &Gate) {
    match g {
        Gate::Id(_) => {}
        Gate::X(q) => {
            let bit = 1usize << q;
            for b in 0..amps.len() {
                if b & bit == 0 {
                    amps.swap(b, b | bit);
                }
            }
        }
        Gate::Cnot { control, target } => {
            let c = 1usize << control;
            let t = 1usize << target;
            for b in 0..amps.len() {
                if b & c != 0 && b & t == 0 {
                    amps.swap(b, b | t);
                }
            }
        }
        Gate::Swap(a, b) => {
            let ba = 1usize << a;
            let bb = 1usize << b;
            for i in 0..amps.len() {
                if i & ba != 0 && i & bb == 0 {
                    amps.swap(i, i ^ ba ^ bb);
                }
            }
        }
        Gate::PauliRotation { pauli, angle } => pauli_rotation_unchecked(amps, pauli, *angle),
        Gate::GlobalPhase(a) => {
            let ph = C64::from_polar(1.0, -a / 2.0);
            amps.iter_mut().for_each(|x| *x *= ph);
        }
        Gate::ControlledPauli { control, pauli } => {
            let cbit = 1usize << control;
            let src = amps.to_vec();
            for (b, a) in amps.iter_mut().enumerate() {
                if b & cbit != 0 {
                    *a = ZERO;
                }
            }
            for (b, a) in src.iter().enumerate() {
                if b & cbit != 0 {
                    let (row, f) = pauli.action(b);
                    amps[row] += f * a;
                }
            }
        }
        Gate::Controlled {
            controls,
            values,
            targets,
            matrix,
        } => {
            let mut mask = 0usize;
            let mut val = 0usize;
            for (&c, &v) in controls.iter().zip(values) {
                mask |= 1 << c;
                val |= (v as usize) << c;
            }
            apply_matrix(amps, targets, matrix, mask, val);
        }
        Gate::Unitary { qubits, matrix } => apply_matrix(amps, qubits, matrix, 0, 0),
        single => {
            let q = single.qubits()[0];
            apply_1q(amps, q, &single.matrix(), 0, 0);
        }
    }
}

/// Applies a gate to a raw amplitude buffer after validating it.
pub fn apply_gate_to(amps: &mut [C64], n: usize, g: &Gate) -> Result<()> {
    check_dim(1usize << n, amps.len())?;
    g.validate(n)?;
    apply_gate_unchecked(amps, g);
    Ok(())
}

/// Dense `2^n` matrix of a gate on an `n`-qubit register.
pub fn gate_to_dense(g: &Gate, n: usize) -> Result<CMatrix> {
    crate::pauli::check_dense_cap(n)?;
    g.validate(n)?;
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    let mut col = vec![ZERO; dim];
    for b in 0..dim {
        col.iter_mut().for_each(|a| *a = ZERO);
        col[b] = ONE;
        apply_gate_unchecked(&mut col, g);
        for r in 0..dim {
            m[(r, b)] = col[r];
        }
    }
    Ok(m)
}
