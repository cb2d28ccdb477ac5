use serde::Serialize;

use super::ansatz::adaptive_ansatz;
use super::estimator::EstimationMode;
use super::optimize::OptimizerConfig;
use super::vqe::vqe_minimize;
use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::simulator::StateVector;

#[derive(Debug, Clone, Serialize)]
pub struct AdaptSelection {
    /// Pool index of the largest `|g_i|`, ties to the lowest index; `None`
    /// once every gradient is below the threshold.
    pub index: Option<usize>,
    pub gradients: Vec<f64>,
    pub converged: bool,
}

/// Energy gradients `g_i = <ψ|[H, A_i]|ψ>` of appending `exp(θ A_i)` at
/// `θ = 0`, and the operator to append.
pub fn adapt_select(h: &PauliSum, pool: &[PauliSum], psi: &StateVector, threshold: f64) -> Result<AdaptSelection> {
    if pool.is_empty() {
        return Err(Error::Argument("operator pool is empty".into()));
    }
    let mut gradients = Vec::with_capacity(pool.len());
    for a in pool {
        gradients.push(psi.expectation(&h.commutator(a)?)?.re);
    }
    let mut best: Option<usize> = None;
    for (i, g) in gradients.iter().enumerate() {
        if g.abs() >= threshold && best.is_none_or(|b| g.abs() > gradients[b].abs()) {
            best = Some(i);
        }
    }
    Ok(AdaptSelection { index: best, converged: best.is_none(), gradients })
}

#[derive(Debug, Clone, Serialize)]
pub struct AdaptResult {
    pub energy: f64,
    pub parameters: Vec<f64>,
    /// Pool indices in the order they were appended.
    pub selected: Vec<usize>,
    /// Energy after each growth step.
    pub energies: Vec<f64>,
    pub max_gradients: Vec<f64>,
    pub converged: bool,
}

/// Grows an ansatz from `reference` one pool operator at a time, fully
/// re-optimizing after each addition, until the gradients fall below
/// `threshold` or `max_operators` have been added.
pub fn adapt_vqe(
    h: &PauliSum,
    pool: &[PauliSum],
    labels: &[String],
    reference: u64,
    optimizer: &OptimizerConfig,
    threshold: f64,
    max_operators: usize,
) -> Result<AdaptResult> {
    if labels.len() != pool.len() {
        return Err(Error::Dimension { expected: pool.len(), found: labels.len() });
    }
    let n = h.n_qubits();
    let mut ansatz = adaptive_ansatz(n, reference)?;
    let mut theta: Vec<f64> = Vec::new();
    let mut psi = ansatz.prepare(&theta)?;
    let mut energy = psi.expectation(h)?.re;
    let mut out = AdaptResult {
        energy,
        parameters: Vec::new(),
        selected: Vec::new(),
        energies: Vec::new(),
        max_gradients: Vec::new(),
        converged: false,
    };
    for step in 0..max_operators {
        let sel = adapt_select(h, pool, &psi, threshold)?;
        out.max_gradients.push(sel.gradients.iter().fold(0.0, |m: f64, g| m.max(g.abs())));
        let Some(i) = sel.index else {
            out.converged = true;
            break;
        };
        ansatz.push_generator(&pool[i], &format!("{}#{step}", labels[i]))?;
        theta.push(0.0);
        let r = vqe_minimize(h, &ansatz, optimizer, EstimationMode::Exact, Some(&theta))?;
        theta = r.parameters;
        energy = r.energy;
        psi = ansatz.prepare(&theta)?;
        out.selected.push(i);
        out.energies.push(energy);
    }
    out.energy = energy;
    out.parameters = theta;
    Ok(out)
}
