use rand::Rng;

use super::gate::Gate;
use super::state::{ShotEstimate, StateVector};
use crate::error::Result;
use crate::linalg::C64;
use crate::pauli::{Pauli, PauliString};

fn controlled_register(psi: &StateVector, ops: &[Gate]) -> Result<StateVector> {
    let n = psi.n_qubits();
    let anc = StateVector::zero(1)?;
    let mut full = anc.tensor(psi)?;
    full.apply_gate(&Gate::H(n))?;
    for g in ops {
        full.apply_gate(&g.controlled_by(n))?;
    }
    Ok(full)
}

/// `<psi|V|psi>` for `V = ops[last] ... ops[0]`, read from the ancilla as
/// `<X> + i<Y>`.
pub fn hadamard_test(psi: &StateVector, ops: &[Gate]) -> Result<C64> {
    let n = psi.n_qubits();
    let full = controlled_register(psi, ops)?;
    let x = full.expectation_string(&PauliString::single(n + 1, n, Pauli::X))?;
    let y = full.expectation_string(&PauliString::single(n + 1, n, Pauli::Y))?;
    Ok(C64::new(x.re, y.re))
}

/// Shot-sampled Hadamard test; returns the real and imaginary estimates.
pub fn hadamard_test_shots<R: Rng>(
    psi: &StateVector,
    ops: &[Gate],
    shots: usize,
    rng: &mut R,
) -> Result<(ShotEstimate, ShotEstimate)> {
    let n = psi.n_qubits();
    let full = controlled_register(psi, ops)?;
    let re = full.sample_pauli(&PauliString::single(n + 1, n, Pauli::X), shots, rng)?;
    let im = full.sample_pauli(&PauliString::single(n + 1, n, Pauli::Y), shots, rng)?;
    Ok((re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_state;
    use crate::simulator::gate::pauli_gates;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn matches_direct_expectation() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let psi = StateVector::from_amplitudes(random_state(8, &mut rng)).unwrap();
        let p: PauliString = "-iXYZ".parse().unwrap();
        let ops = pauli_gates(&p);
        let got = hadamard_test(&psi, &ops).unwrap();
        let want = psi.expectation_string(&p).unwrap();
        assert!((got - want).norm() < 1e-12);

        let ops = vec![Gate::Rx(0, 0.4), Gate::Cnot { control: 0, target: 2 }, Gate::GlobalPhase(0.7)];
        let mut v = psi.clone();
        for g in &ops {
            v.apply_gate(g).unwrap();
        }
        let want = psi.inner(&v).unwrap();
        assert!((hadamard_test(&psi, &ops).unwrap() - want).norm() < 1e-12);
    }
}
