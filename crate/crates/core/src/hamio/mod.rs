//! Integral files, Pauli-sum JSON, and factorizations of integrals and
//! orbital rotations.

mod cholesky;
mod fcidump;
mod givens;
mod integrals;
mod json;
mod lowrank;

pub use cholesky::{cholesky_factorize, pivoted_cholesky, LowRankFactors, DEFAULT_CHOLESKY_TOL};
pub use fcidump::{parse_fcidump, write_fcidump};
pub use givens::{givens_decompose, orbital_rotation_circuit, GivensNetwork, GivensRotation};
pub use integrals::{eri_permutations, MolecularIntegrals};
pub use json::{pauli_sum_from_json, pauli_sum_to_json};
pub use lowrank::{LowRankHamiltonian, LowRankTerm};

/// Reads and parses an FCIDUMP file.
pub fn read_fcidump(path: impl AsRef<std::path::Path>) -> crate::Result<MolecularIntegrals> {
    parse_fcidump(&std::fs::read_to_string(path)?)
}
