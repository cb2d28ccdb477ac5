use serde::Serialize;

use crate::error::Result;
use crate::simulator::StateVector;

pub(crate) fn amplitudes_json(psi: &StateVector) -> Vec<[f64; 2]> {
    psi.amplitudes().iter().map(|a| [a.re, a.im]).collect()
}

/// Outcome of a time-evolution engine.
#[derive(Debug, Clone, Serialize)]
pub struct EvolutionReport {
    pub method: String,
    pub time: f64,
    pub steps: usize,
    pub order: usize,
    /// A-priori bound on the operator (or, for Taylor, state) error.
    pub bound: Option<f64>,
    /// `|| psi - exp(-iHt) psi ||` when the dense oracle is within reach.
    pub measured_error: Option<f64>,
    /// Term labels in application order.
    pub term_order: Vec<String>,
    /// Per-segment success probabilities for probabilistic engines.
    pub success_probabilities: Vec<f64>,
    pub final_state: Vec<[f64; 2]>,
    #[serde(skip)]
    pub state: StateVector,
}

impl EvolutionReport {
    pub(crate) fn new(method: &str, time: f64, steps: usize, order: usize, state: StateVector) -> Self {
        EvolutionReport {
            method: method.to_string(),
            time,
            steps,
            order,
            bound: None,
            measured_error: None,
            term_order: Vec::new(),
            success_probabilities: Vec::new(),
            final_state: amplitudes_json(&state),
            state,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
