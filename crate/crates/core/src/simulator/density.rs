use rand::Rng;

use super::gate::Gate;
use super::state::{apply_gate_unchecked, apply_matrix, sample_distribution, StateVector};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigvalsh, CMatrix, C64, ONE, ZERO};
use crate::pauli::PauliSum;

/// Largest register held as a density matrix.
pub const DENSITY_CAP: usize = 12;

/// Tolerance on `sum K†K = 1`.
pub const KRAUS_TOL: f64 = 1e-10;

/// A completely positive trace-preserving map given by Kraus operators
/// acting on `qubits` (least significant first).
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    qubits: Vec<usize>,
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    /// Checks shapes and completeness before accepting the operators.
    pub fn new(qubits: Vec<usize>, ops: Vec<CMatrix>) -> Result<Self> {
        let d = 1usize << qubits.len();
        if ops.is_empty() {
            return Err(Error::Channel("no Kraus operators".into()));
        }
        let mut sum = CMatrix::zeros(d, d);
        for k in &ops {
            if k.nrows() != d || k.ncols() != d {
                return Err(Error::Channel(format!(
                    "Kraus operator is {}x{}, expected {d}x{d}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            sum += k.adjoint() * k;
        }
        let dev = crate::linalg::max_abs_diff(&sum, &CMatrix::identity(d, d));
        if dev > KRAUS_TOL {
            return Err(Error::Channel(format!(
                "Kraus operators are incomplete (deviation {dev:.3e})"
            )));
        }
        Ok(KrausChannel { qubits, ops })
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    /// `rho -> (1 - p) rho + p I/2` on one qubit.
    pub fn depolarizing(q: usize, p: f64) -> Result<Self> {
        check_rate(p)?;
        let paulis = [Gate::X(0), Gate::Y(0), Gate::Z(0)];
        let mut ops = vec![CMatrix::identity(2, 2) * C64::new((1.0 - 0.75 * p).sqrt(), 0.0)];
        for g in paulis {
            ops.push(g.matrix() * C64::new((p / 4.0).sqrt(), 0.0));
        }
        KrausChannel::new(vec![q], ops)
    }

    /// Relaxation `|1> -> |0>` with probability `gamma`.
    pub fn amplitude_damping(q: usize, gamma: f64) -> Result<Self> {
        check_rate(gamma)?;
        let k0 = CMatrix::from_row_slice(
            2,
            2,
            &[ONE, ZERO, ZERO, C64::new((1.0 - gamma).sqrt(), 0.0)],
        );
        let k1 = CMatrix::from_row_slice(2, 2, &[ZERO, C64::new(gamma.sqrt(), 0.0), ZERO, ZERO]);
        KrausChannel::new(vec![q], vec![k0, k1])
    }

    /// Loss of coherence without energy exchange; off-diagonals scale by
    /// `sqrt(1 - lambda)`.
    pub fn phase_damping(q: usize, lambda: f64) -> Result<Self> {
        check_rate(lambda)?;
        let k0 = CMatrix::from_row_slice(
            2,
            2,
            &[ONE, ZERO, ZERO, C64::new((1.0 - lambda).sqrt(), 0.0)],
        );
        let k1 = CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, C64::new(lambda.sqrt(), 0.0)]);
        KrausChannel::new(vec![q], vec![k0, k1])
    }

    /// Single-Kraus channel of a gate.
    pub fn from_gate(g: &Gate) -> Result<Self> {
        let qs = g.qubits();
        if qs.is_empty() {
            // A global phase acts trivially on density matrices.
            return KrausChannel::new(vec![0], vec![CMatrix::identity(2, 2)]);
        }
        KrausChannel::new(qs, vec![g.matrix()])
    }
}

fn check_rate(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Channel(format!("rate {p} outside [0, 1]")))
    }
}

/// A dense mixed state over `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    rho: CMatrix,
}

fn check_cap(n: usize) -> Result<()> {
    if n > DENSITY_CAP {
        Err(Error::Resource(format!(
            "{n} qubits exceeds density-matrix cap of {DENSITY_CAP}"
        )))
    } else {
        Ok(())
    }
}

impl DensityMatrix {
    pub fn zero(n: usize) -> Result<Self> {
        Self::from_state(&StateVector::zero(n)?)
    }

    pub fn from_state(psi: &StateVector) -> Result<Self> {
        check_cap(psi.n_qubits())?;
        let v = psi.to_vector();
        Ok(DensityMatrix {
            n: psi.n_qubits(),
            rho: &v * v.adjoint(),
        })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_cap(n)?;
        let d = 1usize << n;
        Ok(DensityMatrix {
            n,
            rho: CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0),
        })
    }

    /// Wraps a matrix after checking Hermiticity, trace and positivity.
    pub fn from_matrix(rho: CMatrix) -> Result<Self> {
        let d = rho.nrows();
        if !rho.is_square() || !d.is_power_of_two() {
            return Err(Error::Argument("density matrix must be 2^n square".into()));
        }
        let n = d.trailing_zeros() as usize;
        check_cap(n)?;
        let dm = DensityMatrix { n, rho };
        dm.validate(1e-10)?;
        Ok(dm)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }

    /// Checks Hermiticity, unit trace and nonnegative spectrum within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = crate::linalg::max_abs_diff(&self.rho, &self.rho.adjoint());
        if herm > tol {
            return Err(Error::Validation(format!("not Hermitian ({herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > tol {
            return Err(Error::Validation(format!("trace {tr} is not 1")));
        }
        let min = eigvalsh(&self.rho).first().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::Validation(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// Applies `M rho M†` for a local matrix `M` on `qubits`.
    fn sandwich(&self, qubits: &[usize], m: &CMatrix) -> CMatrix {
        let d = self.rho.nrows();
        // Left multiply column by column, then right multiply via the adjoint.
        let mut left = self.rho.clone();
        for c in 0..d {
            let mut col: Vec<C64> = left.column(c).iter().copied().collect();
            apply_matrix(&mut col, qubits, m, 0, 0);
            left.set_column(c, &crate::linalg::CVector::from_vec(col));
        }
        let mut out = left.adjoint();
        for c in 0..d {
            let mut col: Vec<C64> = out.column(c).iter().copied().collect();
            apply_matrix(&mut col, qubits, m, 0, 0);
            out.set_column(c, &crate::linalg::CVector::from_vec(col));
        }
        out.adjoint()
    }

    /// `rho -> U rho U†`.
    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        g.validate(self.n)?;
        let d = self.rho.nrows();
        let mut left = self.rho.clone();
        for c in 0..d {
            let mut col: Vec<C64> = left.column(c).iter().copied().collect();
            apply_gate_unchecked(&mut col, g);
            left.set_column(c, &crate::linalg::CVector::from_vec(col));
        }
        let mut out = left.adjoint();
        for c in 0..d {
            let mut col: Vec<C64> = out.column(c).iter().copied().collect();
            apply_gate_unchecked(&mut col, g);
            out.set_column(c, &crate::linalg::CVector::from_vec(col));
        }
        self.rho = out.adjoint();
        Ok(())
    }

    /// `rho -> sum_k K_k rho K_k†`.
    pub fn apply_channel(&mut self, ch: &KrausChannel) -> Result<()> {
        for &q in ch.qubits() {
            if q >= self.n {
                return Err(Error::Dimension {
                    expected: self.n,
                    found: q + 1,
                });
            }
        }
        let d = self.rho.nrows();
        let mut acc = CMatrix::zeros(d, d);
        for k in ch.operators() {
            acc += self.sandwich(ch.qubits(), k);
        }
        self.rho = acc;
        Ok(())
    }

    /// `Tr(rho A)`.
    pub fn expectation(&self, a: &PauliSum) -> Result<C64> {
        check_dim(self.n, a.n_qubits())?;
        let d = self.rho.nrows();
        let mut total = ZERO;
        for (p, c) in a.iter() {
            for b in 0..d {
                let (row, amp) = p.action(b);
                // Tr(rho P) = sum_b <b| rho P |b> = sum_b rho[b, row] amp.
                total += c * self.rho[(b, row)] * amp;
            }
        }
        Ok(total)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.rho.nrows()).map(|k| self.rho[(k, k)].re).collect()
    }

    pub fn sample<R: Rng>(&self, shots: usize, rng: &mut R) -> Result<Vec<usize>> {
        sample_distribution(&self.probabilities(), shots, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn random_rho(n: usize, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let g = random_hermitian(1 << n, &mut rng);
        let psd = &g * g.adjoint();
        let tr = psd.trace();
        DensityMatrix::from_matrix(psd / tr).unwrap()
    }

    #[test]
    fn channels_preserve_trace() {
        let mut rho = random_rho(2, 1);
        for ch in [
            KrausChannel::depolarizing(0, 0.3).unwrap(),
            KrausChannel::amplitude_damping(1, 0.2).unwrap(),
            KrausChannel::phase_damping(0, 0.7).unwrap(),
        ] {
            rho.apply_channel(&ch).unwrap();
            assert!((rho.trace() - ONE).norm() < 1e-12);
            rho.validate(1e-10).unwrap();
        }
    }

    #[test]
    fn full_amplitude_damping_relaxes_to_ground() {
        let mut rho = DensityMatrix::from_state(&StateVector::basis(1, 1).unwrap()).unwrap();
        rho.apply_channel(&KrausChannel::amplitude_damping(0, 1.0).unwrap())
            .unwrap();
        assert_eq!(rho, DensityMatrix::zero(1).unwrap());
    }

    #[test]
    fn depolarizing_matches_mixture_formula() {
        let rho0 = random_rho(1, 4);
        let p = 0.37;
        let mut rho = rho0.clone();
        rho.apply_channel(&KrausChannel::depolarizing(0, p).unwrap())
            .unwrap();
        let expected = rho0.matrix() * C64::new(1.0 - p, 0.0)
            + CMatrix::identity(2, 2) * C64::new(p / 2.0, 0.0);
        assert!(max_abs_diff(rho.matrix(), &expected) < 1e-14);
    }

    #[test]
    fn incomplete_kraus_set_is_rejected() {
        let k = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        assert!(matches!(
            KrausChannel::new(vec![0], vec![k]),
            Err(Error::Channel(_))
        ));
        assert!(KrausChannel::depolarizing(0, 1.5).is_err());
    }

    #[test]
    fn unitary_evolution_keeps_purity() {
        let mut rho = DensityMatrix::zero(2).unwrap();
        rho.apply_gate(&Gate::H(0)).unwrap();
        rho.apply_gate(&Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        let zz = PauliSum::from_labels(&[("ZZ", 1.0)]).unwrap();
        assert!((rho.expectation(&zz).unwrap() - ONE).norm() < 1e-12);
    }
}
