use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use crate::pauli::PauliSum;
use crate::simulator::{hadamard_test, hadamard_test_shots, pauli_gates, Circuit, Gate, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixElement {
    pub value: C64,
    /// Standard errors of the real and imaginary parts.
    pub sigma_re: f64,
    pub sigma_im: f64,
}

fn sandwich(va: &[Gate], p: &crate::pauli::PauliString, vb: &[Gate]) -> Vec<Gate> {
    let mut ops = vb.to_vec();
    ops.extend(pauli_gates(p));
    ops.extend(va.iter().rev().map(Gate::adjoint));
    ops
}

fn reference(prep: &Circuit, params: &[f64], b: &PauliSum) -> Result<StateVector> {
    if b.n_qubits() != prep.n_qubits() {
        return Err(Error::Dimension { expected: prep.n_qubits(), found: b.n_qubits() });
    }
    let mut psi = StateVector::zero(prep.n_qubits())?;
    psi.apply_circuit(prep, params)?;
    Ok(psi)
}

/// `<v_a|B|v_b>` with `|v_x> = V_x |ψ>` and `|ψ>` prepared by `prep`, one
/// Hadamard test of `V_a† P V_b` per term of `B`. The ancilla readout is
/// `<X> + i<Y> = 2<S₋>`.
pub fn hadamard_matrix_element(
    prep: &Circuit,
    params: &[f64],
    va: &[Gate],
    vb: &[Gate],
    b: &PauliSum,
) -> Result<MatrixElement> {
    let psi = reference(prep, params, b)?;
    let mut value = ZERO;
    for (p, c) in b.iter() {
        value += c * hadamard_test(&psi, &sandwich(va, p, vb))?;
    }
    Ok(MatrixElement { value, sigma_re: 0.0, sigma_im: 0.0 })
}

/// Shot-sampled [`hadamard_matrix_element`], `shots` per term and
/// quadrature.
pub fn hadamard_matrix_element_shots<R: Rng>(
    prep: &Circuit,
    params: &[f64],
    va: &[Gate],
    vb: &[Gate],
    b: &PauliSum,
    shots: usize,
    rng: &mut R,
) -> Result<MatrixElement> {
    let psi = reference(prep, params, b)?;
    let mut value = ZERO;
    let (mut var_re, mut var_im) = (0.0, 0.0);
    for (p, c) in b.iter() {
        let (re, im) = hadamard_test_shots(&psi, &sandwich(va, p, vb), shots, rng)?;
        let z = C64::new(re.mean, im.mean);
        value += c * z;
        // (c_r + i c_i)(x + i y): real part c_r x - c_i y, imaginary c_i x + c_r y.
        var_re += (c.re * re.sigma).powi(2) + (c.im * im.sigma).powi(2);
        var_im += (c.im * re.sigma).powi(2) + (c.re * im.sigma).powi(2);
    }
    Ok(MatrixElement { value, sigma_re: var_re.sqrt(), sigma_im: var_im.sqrt() })
}
