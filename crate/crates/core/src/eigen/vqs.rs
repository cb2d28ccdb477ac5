use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::linalg::regularized_solve;
use crate::pauli::PauliSum;

/// Tikhonov weight for the McLachlan solve.
pub const VQS_REGULARIZATION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Euler,
    Rk4,
}

/// `A_rk = Re<∂_rψ|∂_kψ>` and `b_r = Im<∂_rψ|H|ψ>`, without a global-phase
/// correction.
pub fn mclachlan_system(ansatz: &Ansatz, theta: &[f64], h: &PauliSum) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if h.n_qubits() != ansatz.n_qubits() {
        return Err(Error::Dimension { expected: ansatz.n_qubits(), found: h.n_qubits() });
    }
    let psi = ansatz.prepare(theta)?;
    let d = ansatz.derivative_states(theta)?;
    let hpsi = h.apply(psi.amplitudes());
    let m = d.len();
    let dot = |u: &[crate::linalg::C64], v: &[crate::linalg::C64]| -> crate::linalg::C64 {
        u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
    };
    let mut a = DMatrix::zeros(m, m);
    let mut b = DVector::zeros(m);
    for r in 0..m {
        for k in r..m {
            let v = dot(&d[r], &d[k]).re;
            a[(r, k)] = v;
            a[(k, r)] = v;
        }
        b[r] = dot(&d[r], &hpsi).im;
    }
    Ok((a, b))
}

#[derive(Debug, Clone, Serialize)]
pub struct VqsStep {
    pub theta: Vec<f64>,
    /// Smallest eigenvalue of `A` at the start of the step.
    pub min_eigenvalue: f64,
    pub rank_deficient: bool,
}

fn theta_dot(ansatz: &Ansatz, theta: &[f64], h: &PauliSum) -> Result<(Vec<f64>, f64)> {
    let (a, b) = mclachlan_system(ansatz, theta, h)?;
    let min_eig = if a.nrows() == 0 {
        0.0
    } else {
        a.clone().symmetric_eigenvalues().iter().fold(f64::INFINITY, |m, &v| m.min(v))
    };
    Ok((regularized_solve(&a, &b, VQS_REGULARIZATION).iter().copied().collect(), min_eig))
}

/// One step of `A θ̇ = b` by explicit Euler or classical RK4.
pub fn vqs_step(ansatz: &Ansatz, theta: &[f64], h: &PauliSum, dt: f64, integrator: Integrator) -> Result<VqsStep> {
    let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let (k1, min_eigenvalue) = theta_dot(ansatz, theta, h)?;
    let next = match integrator {
        Integrator::Euler => axpy(theta, &k1, dt),
        Integrator::Rk4 => {
            let k2 = theta_dot(ansatz, &axpy(theta, &k1, dt / 2.0), h)?.0;
            let k3 = theta_dot(ansatz, &axpy(theta, &k2, dt / 2.0), h)?.0;
            let k4 = theta_dot(ansatz, &axpy(theta, &k3, dt), h)?.0;
            (0..theta.len())
                .map(|i| theta[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect()
        }
    };
    let rank_deficient = min_eigenvalue < VQS_REGULARIZATION;
    if rank_deficient {
        log::warn!("McLachlan matrix is rank deficient (smallest eigenvalue {min_eigenvalue:.2e}); step may be stiff");
    }
    Ok(VqsStep { theta: next, min_eigenvalue, rank_deficient })
}

#[derive(Debug, Clone, Serialize)]
pub struct VqsTrajectory {
    pub times: Vec<f64>,
    pub thetas: Vec<Vec<f64>>,
    pub rank_deficient_steps: usize,
}

/// Integrates from `theta0` over `[0, t]` in `steps` equal steps.
pub fn vqs_evolve(
    ansatz: &Ansatz,
    theta0: &[f64],
    h: &PauliSum,
    t: f64,
    steps: usize,
    integrator: Integrator,
) -> Result<VqsTrajectory> {
    if steps == 0 {
        return Err(Error::Argument("steps must be at least 1".into()));
    }
    let dt = t / steps as f64;
    let mut theta = theta0.to_vec();
    let mut out = VqsTrajectory { times: vec![0.0], thetas: vec![theta.clone()], rank_deficient_steps: 0 };
    for k in 1..=steps {
        let s = vqs_step(ansatz, &theta, h, dt, integrator)?;
        out.rank_deficient_steps += s.rank_deficient as usize;
        theta = s.theta;
        out.times.push(k as f64 * dt);
        out.thetas.push(theta.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::ansatz::AnsatzKind;
    use crate::linalg::expm_hermitian;
    use crate::simulator::{Circuit, Gate, StateVector};

    #[test]
    fn single_rz_tracks_exact_phase() {
        let mut c = Circuit::new(1);
        c.push(Gate::H(0)).unwrap();
        c.push_param(Gate::Rz(0, 0.0), "t", 1.0).unwrap();
        let a = Ansatz { kind: AnsatzKind::AdaptivePool, circuit: c, generators: vec![], labels: vec![] };
        let h = PauliSum::from_labels(&[("Z", 1.0)]).unwrap();
        let tr = vqs_evolve(&a, &[0.0], &h, 1.0, 20, Integrator::Rk4).unwrap();
        let got = a.prepare(tr.thetas.last().unwrap()).unwrap();
        let mut plus = StateVector::zero(1).unwrap();
        plus.apply_gate(&Gate::H(0)).unwrap();
        let exact = StateVector::from_vector(&(expm_hermitian(&h.to_dense().unwrap(), 1.0) * plus.to_vector())).unwrap();
        assert!(got.fidelity(&exact).unwrap() > 1.0 - 1e-8);
    }

    #[test]
    fn metric_is_symmetric_psd() {
        let a = crate::eigen::ansatz::hardware_efficient_ansatz(2, 1).unwrap();
        let theta: Vec<f64> = (0..a.n_params()).map(|k| 0.1 * k as f64).collect();
        let h = PauliSum::from_labels(&[("XZ", 0.5), ("YY", 0.2)]).unwrap();
        let (m, _) = mclachlan_system(&a, &theta, &h).unwrap();
        assert!((&m - m.transpose()).amax() < 1e-10);
        assert!(m.symmetric_eigenvalues().iter().all(|&v| v > -1e-10));
    }
}
