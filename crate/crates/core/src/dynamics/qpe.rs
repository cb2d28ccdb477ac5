use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_function, is_unitary, CMatrix, C64};
use crate::pauli::PauliSum;
use crate::simulator::{sample_distribution, Circuit, Gate, StateVector};

fn phase_gate(phi: f64) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C64::new(1.0, 0.0),
        C64::from_polar(1.0, phi),
    ]))
}

/// `|x> -> 2^{-t/2} Σ_y e^{2πi xy / 2^t} |y>` on qubits `offset..offset+t`.
pub fn qft_circuit(t: usize, offset: usize, n_total: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n_total);
    for j in (0..t).rev() {
        c.push(Gate::H(offset + j))?;
        for k in (0..j).rev() {
            let phi = std::f64::consts::PI / (1u64 << (j - k)) as f64;
            c.push(Gate::Controlled {
                controls: vec![offset + k],
                values: vec![true],
                targets: vec![offset + j],
                matrix: phase_gate(phi),
            })?;
        }
    }
    for i in 0..t / 2 {
        c.push(Gate::Swap(offset + i, offset + t - 1 - i))?;
    }
    Ok(c)
}

/// Phase-estimation circuit: system on the low qubits, ancilla `j` on qubit
/// `n + j` controlling `U^{2^j}`, then the inverse QFT.
pub fn qpe_circuit(u: &CMatrix, n_system: usize, t: usize) -> Result<Circuit> {
    if u.nrows() != 1 << n_system || !is_unitary(u, 1e-10) {
        return Err(Error::Argument("QPE needs a unitary on the system register".into()));
    }
    let n = n_system + t;
    let mut c = Circuit::new(n);
    for j in 0..t {
        c.push(Gate::H(n_system + j))?;
    }
    let mut power = u.clone();
    for j in 0..t {
        c.push(Gate::Controlled {
            controls: vec![n_system + j],
            values: vec![true],
            targets: (0..n_system).collect(),
            matrix: power.clone(),
        })?;
        power = &power * &power;
    }
    c.extend(&qft_circuit(t, n_system, n)?.inverse())?;
    Ok(c)
}

#[derive(Debug, Clone, Serialize)]
pub struct QpeResult {
    pub n_ancillas: usize,
    /// Exact outcome distribution over the ancilla register.
    pub probabilities: Vec<f64>,
    /// Sampled counts per outcome; empty when no shots were taken.
    pub counts: Vec<usize>,
    pub shots: usize,
    /// Most frequent outcome (or most probable, without shots).
    pub mode: usize,
    /// `mode / 2^t`.
    pub estimate: f64,
}

impl QpeResult {
    pub fn frequency(&self, z: usize) -> f64 {
        if self.shots == 0 {
            self.probabilities[z]
        } else {
            self.counts[z] as f64 / self.shots as f64
        }
    }
}

/// Runs phase estimation of `u` on `psi` with `t` ancillas.
pub fn qpe<R: Rng>(u: &CMatrix, psi: &StateVector, t: usize, shots: usize, rng: &mut R) -> Result<QpeResult> {
    if t == 0 {
        return Err(Error::Argument("QPE needs at least one ancilla".into()));
    }
    let n = psi.n_qubits();
    let circuit = qpe_circuit(u, n, t)?;
    let mut full = StateVector::zero(t)?.tensor(psi)?;
    full.apply_circuit(&circuit, &[])?;
    let mut probabilities = vec![0.0; 1 << t];
    for (idx, a) in full.amplitudes().iter().enumerate() {
        probabilities[idx >> n] += a.norm_sqr();
    }
    let mut counts = Vec::new();
    if shots > 0 {
        counts = vec![0; 1 << t];
        for z in sample_distribution(&probabilities, shots, rng)? {
            counts[z] += 1;
        }
    }
    let mode = if shots > 0 {
        (0..counts.len()).max_by_key(|&z| (counts[z], std::cmp::Reverse(z))).unwrap()
    } else {
        (0..probabilities.len())
            .max_by(|&a, &b| probabilities[a].total_cmp(&probabilities[b]).then(b.cmp(&a)))
            .unwrap()
    };
    Ok(QpeResult {
        n_ancillas: t,
        probabilities,
        counts,
        shots,
        mode,
        estimate: mode as f64 / (1u64 << t) as f64,
    })
}

/// `U = exp(i H')` with `H' = 2π (H - E1) / (E2 - E1)`, so eigenvalues in
/// `[E1, E2)` map to phases in `[0, 1)`.
pub fn shifted_unitary(h: &PauliSum, e1: f64, e2: f64) -> Result<CMatrix> {
    if e2 <= e1 {
        return Err(Error::Argument("energy window needs E2 > E1".into()));
    }
    let scale = std::f64::consts::TAU / (e2 - e1);
    Ok(hermitian_function(&h.to_dense()?, |e| C64::from_polar(1.0, scale * (e - e1))))
}

pub fn phase_to_energy(theta: f64, e1: f64, e2: f64) -> f64 {
    e1 + theta * (e2 - e1)
}

/// Energy estimate from phase estimation of the shifted propagator.
pub fn qpe_energy<R: Rng>(
    h: &PauliSum,
    psi: &StateVector,
    t: usize,
    e1: f64,
    e2: f64,
    shots: usize,
    rng: &mut R,
) -> Result<(QpeResult, f64)> {
    let u = shifted_unitary(h, e1, e2)?;
    let res = qpe(&u, psi, t, shots, rng)?;
    let e = phase_to_energy(res.estimate, e1, e2);
    Ok((res, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn qft_is_dft() {
        for t in 1..=4 {
            let n = 1 << t;
            let q = qft_circuit(t, 0, t).unwrap().to_dense(&[]).unwrap();
            let w = std::f64::consts::TAU / n as f64;
            let dft = CMatrix::from_fn(n, n, |y, x| C64::from_polar(1.0 / (n as f64).sqrt(), w * (x * y) as f64));
            assert!(max_abs_diff(&q, &dft) < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn dyadic_phase_is_exact() {
        let u = phase_gate(std::f64::consts::TAU * 3.0 / 8.0);
        let psi = StateVector::basis(1, 1).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let r = qpe(&u, &psi, 3, 100, &mut rng).unwrap();
        assert_eq!(r.mode, 0b011);
        assert!((r.probabilities[3] - 1.0).abs() < 1e-12);
        assert_eq!(r.counts[3], 100);
    }

    #[test]
    fn shifted_energy_maps_back() {
        let h = PauliSum::from_labels(&[("Z", 0.3), ("I", -1.0)]).unwrap();
        let psi = StateVector::basis(1, 1).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (_, e) = qpe_energy(&h, &psi, 6, -2.0, 0.0, 0, &mut rng).unwrap();
        assert!((e - (-1.3)).abs() <= 2.0 / 64.0);
    }
}
