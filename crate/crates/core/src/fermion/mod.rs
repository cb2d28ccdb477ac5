//! Second-quantized operators and their qubit encodings.
//!
//! Occupied modes map to `|1>`. Spin orbitals are blocked by default: all
//! spin-up modes, then all spin-down modes.

mod boson;
mod encoding;
mod hamiltonian;
mod operator;
mod taper;

pub use boson::{boson_qubits, encode_boson_level, BosonScheme};
pub use encoding::{
    bravyi_kitaev, encode, encode_occupation, fix_qubits, jordan_wigner, parity_encode,
    EncodingScheme, Gf2Matrix, LinearEncoding,
};
pub use hamiltonian::{
    build_molecular_hamiltonian, hartree_fock_occupation, number_operator, spin_number_operator,
    SpinOrdering,
};
pub use operator::{FermionOperator, Ladder};
pub use taper::{find_z2_symmetries, taper, SectorReport, SymmetrySector};
