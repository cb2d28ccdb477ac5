use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, unitary_with_first_column, CMatrix, C64, ZERO};
use crate::pauli::{check_dense_cap, PauliString, PauliSum};
use crate::simulator::{Gate, ShotEstimate, StateVector};

const PHASE_TOL: f64 = 1e-12;
const ANNIHILATION_TOL: f64 = 1e-14;

/// `X = Σ_l α_l U_l` with `α_l >= 0` and signed Pauli strings `U_l`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LcuDecomposition {
    pub n_qubits: usize,
    pub alphas: Vec<f64>,
    pub unitaries: Vec<PauliString>,
    pub alpha: f64,
}

impl LcuDecomposition {
    pub fn new(alphas: Vec<f64>, unitaries: Vec<PauliString>) -> Result<Self> {
        if alphas.is_empty() || alphas.len() != unitaries.len() {
            return Err(Error::Argument("LCU needs matching nonempty alphas and unitaries".into()));
        }
        if let Some(a) = alphas.iter().find(|a| !(**a >= 0.0)) {
            return Err(Error::Argument(format!("LCU weight {a} is negative")));
        }
        let n = unitaries[0].n_qubits();
        if let Some(u) = unitaries.iter().find(|u| u.n_qubits() != n) {
            return Err(Error::Dimension { expected: n, found: u.n_qubits() });
        }
        let alpha = alphas.iter().sum();
        if alpha <= 0.0 {
            return Err(Error::Argument("LCU weights sum to zero".into()));
        }
        Ok(LcuDecomposition { n_qubits: n, alphas, unitaries, alpha })
    }

    /// Folds each coefficient's phase into its string; phases must be
    /// multiples of `π/2`.
    pub fn from_pauli_sum(h: &PauliSum) -> Result<Self> {
        let mut alphas = Vec::new();
        let mut unitaries = Vec::new();
        for (p, c) in h.iter() {
            let mag = c.norm();
            let quarter = c.arg() / std::f64::consts::FRAC_PI_2;
            let k = quarter.round();
            if (quarter - k).abs() * mag > PHASE_TOL {
                return Err(Error::Argument(format!("coefficient {c} of {p} is not a power of i times a real")));
            }
            alphas.push(mag);
            unitaries.push(p.with_phase(((k as i64).rem_euclid(4)) as u8));
        }
        Self::new(alphas, unitaries)
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn n_ancillas(&self) -> usize {
        let l = self.len();
        ((usize::BITS - (l - 1).leading_zeros()) as usize).max(1)
    }

    pub fn to_pauli_sum(&self) -> PauliSum {
        let mut s = PauliSum::zero(self.n_qubits);
        for (a, u) in self.alphas.iter().zip(&self.unitaries) {
            s.add_term(*u, C64::new(*a, 0.0));
        }
        s
    }

    /// `W_p` with first column `sqrt(α_l / α)`.
    pub fn prepare_matrix(&self) -> CMatrix {
        let dim = 1 << self.n_ancillas();
        let mut col = vec![ZERO; dim];
        for (c, a) in col.iter_mut().zip(&self.alphas) {
            *c = C64::new((a / self.alpha).sqrt(), 0.0);
        }
        unitary_with_first_column(&col)
    }

    fn prepare_gate(&self, adjoint: bool) -> Gate {
        let n = self.n_qubits;
        let m = self.prepare_matrix();
        Gate::Unitary {
            qubits: (n..n + self.n_ancillas()).collect(),
            matrix: if adjoint { m.adjoint() } else { m },
        }
    }

    /// `Σ_l |l><l| ⊗ U_l`, identity on unused ancilla values.
    pub fn apply_select(&self, amps: &mut [C64]) {
        let n = self.n_qubits;
        let mask = (1usize << n) - 1;
        let mut out = vec![ZERO; amps.len()];
        for (idx, &a) in amps.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let l = idx >> n;
            if l < self.len() {
                let (row, amp) = self.unitaries[l].action(idx & mask);
                out[(l << n) | row] += amp * a;
            } else {
                out[idx] += a;
            }
        }
        amps.copy_from_slice(&out);
    }

    /// Full-register state `(W_p† ⊗ 1) SELECT (W_p ⊗ 1) |0>|psi>`.
    pub fn block_encode(&self, psi: &StateVector) -> Result<StateVector> {
        let mut full = StateVector::zero(self.n_ancillas())?.tensor(psi)?;
        self.apply_block(&mut full, false)?;
        Ok(full)
    }

    fn apply_block(&self, full: &mut StateVector, adjoint: bool) -> Result<()> {
        full.apply_gate(&self.prepare_gate(false))?;
        if adjoint {
            let mut conj = self.clone();
            conj.unitaries = self.unitaries.iter().map(|u| u.adjoint()).collect();
            conj.apply_select(full.amplitudes_mut());
        } else {
            self.apply_select(full.amplitudes_mut());
        }
        full.apply_gate(&self.prepare_gate(true))
    }

    /// Dense block encoding over ancillas and system.
    pub fn block_encoding(&self) -> Result<CMatrix> {
        let n = self.n_qubits + self.n_ancillas();
        check_dense_cap(n)?;
        let dim = 1 << n;
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut s = StateVector::basis(n, col)?;
            self.apply_block(&mut s, false)?;
            for (row, a) in s.amplitudes().iter().enumerate() {
                m[(row, col)] = *a;
            }
        }
        Ok(m)
    }

}

/// Normalized `XΨ` and the success probability `||XΨ||² / α²`.
#[derive(Debug, Clone)]
pub struct LcuOutcome {
    pub state: StateVector,
    pub probability: f64,
}

/// Runs prepare/select/unprepare and post-selects the ancillas on zero.
pub fn lcu_apply(x: &LcuDecomposition, psi: &StateVector) -> Result<LcuOutcome> {
    let full = x.block_encode(psi)?;
    let low = &full.amplitudes()[..1 << x.n_qubits];
    let probability: f64 = low.iter().map(|a| a.norm_sqr()).sum();
    let norm = x.alpha * probability.sqrt();
    if norm < ANNIHILATION_TOL {
        return Err(Error::Annihilation { norm });
    }
    Ok(LcuOutcome { state: StateVector::from_amplitudes(low.to_vec())?, probability })
}

/// Frequency of the all-zero ancilla outcome over `shots` samples.
pub fn lcu_sample_success<R: Rng>(
    x: &LcuDecomposition,
    psi: &StateVector,
    shots: usize,
    rng: &mut R,
) -> Result<ShotEstimate> {
    if shots == 0 {
        return Err(Error::Argument("shot count must be at least 1".into()));
    }
    let full = x.block_encode(psi)?;
    let hits = full.sample(shots, rng)?.iter().filter(|&&z| z >> x.n_qubits == 0).count();
    let freq = hits as f64 / shots as f64;
    let sigma = (freq * (1.0 - freq) / shots as f64).sqrt();
    Ok(ShotEstimate { mean: freq, sigma, shots })
}

/// `sin²((2k + 1) asin √p)`.
pub fn oaa_probability(p: f64, k: usize) -> f64 {
    let theta = p.clamp(0.0, 1.0).sqrt().asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

#[derive(Debug, Clone)]
pub struct OaaOutcome {
    pub probability: f64,
    pub rounds: usize,
    /// False when the encoded operator is not unitary; the amplitude then
    /// follows Chebyshev polynomials rather than the sine law.
    pub amplified: bool,
    pub state: StateVector,
}

fn reflect_zero(full: &mut StateVector, n: usize) {
    let dim = 1usize << n;
    for a in &mut full.amplitudes_mut()[..dim] {
        *a = -*a;
    }
}

/// `(-W R W† R)^k W |0>|psi>` with `R = 1 - 2|0><0|` on the ancillas.
pub fn oaa_amplify(x: &LcuDecomposition, psi: &StateVector, k: usize) -> Result<OaaOutcome> {
    let n = x.n_qubits;
    let mut full = x.block_encode(psi)?;
    for _ in 0..k {
        reflect_zero(&mut full, n);
        // W† = W_p† SELECT† W_p.
        x.apply_block(&mut full, true)?;
        reflect_zero(&mut full, n);
        x.apply_block(&mut full, false)?;
        for a in full.amplitudes_mut() {
            *a = -*a;
        }
    }
    let probability: f64 = full.amplitudes()[..1 << n].iter().map(|a| a.norm_sqr()).sum();
    let amplified = if check_dense_cap(n).is_ok() {
        let xd = x.to_pauli_sum().to_dense()?;
        // Oblivious only if X†X is a multiple of the identity.
        let gram = xd.adjoint() * &xd;
        let target = CMatrix::identity(1 << n, 1 << n) * gram[(0, 0)];
        max_abs_diff(&gram, &target) < 1e-10 * x.alpha * x.alpha
    } else {
        false
    };
    if !amplified {
        log::warn!("encoded operator is not unitary; amplitude amplification is not oblivious");
    }
    Ok(OaaOutcome { probability, rounds: k, amplified, state: full })
}
