use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Encodings of a `d`-level bosonic mode onto qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BosonScheme {
    /// Standard binary, `ceil(log2 d)` qubits.
    Binary,
    /// Reflected binary code, `ceil(log2 d)` qubits; neighbors differ in one bit.
    Gray,
    /// One-hot, `d` qubits.
    Unary,
}

/// Qubits needed for `d` levels.
pub fn boson_qubits(d: usize, scheme: BosonScheme) -> usize {
    match scheme {
        BosonScheme::Unary => d,
        _ => {
            if d <= 1 {
                0
            } else {
                (usize::BITS - (d - 1).leading_zeros()) as usize
            }
        }
    }
}

/// Bitstring of level `l`, most significant qubit first.
pub fn encode_boson_level(d: usize, scheme: BosonScheme, l: usize) -> Result<String> {
    if l >= d {
        return Err(Error::Argument(format!("level {l} out of range for d = {d}")));
    }
    let width = boson_qubits(d, scheme);
    let code = match scheme {
        BosonScheme::Binary => l,
        BosonScheme::Gray => l ^ (l >> 1),
        BosonScheme::Unary => 1usize << l,
    };
    Ok((0..width)
        .rev()
        .map(|b| if code >> b & 1 == 1 { '1' } else { '0' })
        .collect())
}
