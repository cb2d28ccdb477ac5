use serde::Serialize;

use super::ansatz::Ansatz;
use super::estimator::{EnergyEstimator, EstimationMode};
use super::optimize::{minimize, Objective, OptimizerConfig, TraceRow};
use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::simulator::StateVector;

/// `∂E/∂θ` by the two-term shift rule, applied to every gate occurrence of
/// each parameter: `Σ_j s_j [E(a_j + π/2) - E(a_j - π/2)] / 2`.
pub fn parameter_shift_gradient(
    ansatz: &Ansatz,
    theta: &[f64],
    mut energy: impl FnMut(&StateVector) -> Result<f64>,
) -> Result<Vec<f64>> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let n = ansatz.n_qubits();
    let mut grad = vec![0.0; ansatz.n_params()];
    for (j, op) in ansatz.circuit.ops().iter().enumerate() {
        let Some(p) = op.param else { continue };
        let mut e = [0.0; 2];
        for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
            let mut psi = StateVector::zero(n)?;
            for g in ansatz.shifted_gates(theta, j, sign * half_pi)? {
                psi.apply_gate(&g)?;
            }
            e[k] = energy(&psi)?;
        }
        grad[p.index] += 0.5 * p.scale * (e[0] - e[1]);
    }
    Ok(grad)
}

struct VqeObjective<'a> {
    ansatz: &'a Ansatz,
    estimator: EnergyEstimator,
}

impl Objective for VqeObjective<'_> {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        let psi = self.ansatz.prepare(x)?;
        Ok(self.estimator.estimate(&psi)?.0)
    }

    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let est = &mut self.estimator;
        parameter_shift_gradient(self.ansatz, x, |psi| Ok(est.estimate(psi)?.0))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VqeResult {
    /// Energy at the returned parameters, read out in the run's mode. In
    /// shot mode it is a fresh estimate, independent of the optimization.
    pub energy: f64,
    pub sigma: f64,
    /// Exact expectation at the returned parameters.
    pub exact_energy: f64,
    pub parameters: Vec<f64>,
    pub parameter_names: Vec<String>,
    pub iterations: usize,
    pub evaluations: usize,
    pub seed: u64,
    pub mode: EstimationMode,
    pub optimizer: OptimizerConfig,
    pub measurement_groups: usize,
    pub converged: bool,
    pub diverged: bool,
    pub calibrated_a: Option<f64>,
    pub trace: Vec<TraceRow>,
}

impl VqeResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Minimizes `<ψ(θ)|H|ψ(θ)>` from `theta0` (zeros if absent).
///
/// Exact mode returns the best parameters seen. Shot mode returns the final
/// iterate, since the best noisy estimate is biased low.
pub fn vqe_minimize(
    h: &PauliSum,
    ansatz: &Ansatz,
    optimizer: &OptimizerConfig,
    mode: EstimationMode,
    theta0: Option<&[f64]>,
) -> Result<VqeResult> {
    if h.n_qubits() != ansatz.n_qubits() {
        return Err(Error::Dimension { expected: ansatz.n_qubits(), found: h.n_qubits() });
    }
    let x0 = match theta0 {
        Some(t) if t.len() != ansatz.n_params() => {
            return Err(Error::Dimension { expected: ansatz.n_params(), found: t.len() })
        }
        Some(t) => t.to_vec(),
        None => vec![0.0; ansatz.n_params()],
    };
    let estimator = EnergyEstimator::new(h, mode, optimizer.seed ^ 0x5eed_0f_5ba7)?;
    let groups = estimator.n_groups();
    let mut obj = VqeObjective { ansatz, estimator };
    let opt = minimize(&mut obj, &x0, optimizer)?;
    let parameters = match mode {
        EstimationMode::Exact => opt.best.clone(),
        EstimationMode::Shots(_) => opt.last.clone(),
    };
    let psi = ansatz.prepare(&parameters)?;
    let (energy, sigma) = obj.estimator.estimate(&psi)?;
    let exact_energy = psi.expectation(h)?.re;
    Ok(VqeResult {
        energy,
        sigma,
        exact_energy,
        parameters,
        parameter_names: ansatz.circuit.parameters().to_vec(),
        iterations: opt.iterations,
        evaluations: obj.estimator.evaluations(),
        seed: optimizer.seed,
        mode,
        optimizer: *optimizer,
        measurement_groups: groups,
        converged: opt.converged,
        diverged: opt.diverged,
        calibrated_a: opt.calibrated_a,
        trace: opt.trace,
    })
}
