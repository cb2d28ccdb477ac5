use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::pauli::{PauliString, PauliSum};

#[derive(Serialize, Deserialize)]
struct TermJson {
    pauli: String,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SumJson {
    n_qubits: usize,
    terms: Vec<TermJson>,
}

/// Serializes a sum as `{n_qubits, terms: [{pauli, re, im}]}`.
pub fn pauli_sum_to_json(a: &PauliSum) -> Result<String> {
    let doc = SumJson {
        n_qubits: a.n_qubits(),
        terms: a
            .iter()
            .map(|(p, c)| TermJson { pauli: p.label(), re: c.re, im: c.im })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn pauli_sum_from_json(text: &str) -> Result<PauliSum> {
    let doc: SumJson = serde_json::from_str(text)?;
    let mut terms = Vec::with_capacity(doc.terms.len());
    for t in doc.terms {
        let p: PauliString = t.pauli.parse()?;
        if p.n_qubits() != doc.n_qubits {
            return Err(Error::Validation(format!(
                "term '{}' has {} qubits, expected {}",
                t.pauli,
                p.n_qubits(),
                doc.n_qubits
            )));
        }
        terms.push((p, C64::new(t.re, t.im)));
    }
    PauliSum::from_terms(doc.n_qubits, terms)
}
