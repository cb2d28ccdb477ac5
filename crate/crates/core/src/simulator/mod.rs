//! Dense state-vector and density-matrix execution.
//!
//! Basis index `b` encodes `|z_{n-1} ... z_0>` with qubit 0 as the least
//! significant bit. Global phases are kept, never normalized away.

mod circuit;
mod clifford;
mod density;
mod gate;
mod hadamard;
mod state;

pub use circuit::{Circuit, Op, ParamRef};
pub use clifford::conjugate;
pub use density::{DensityMatrix, KrausChannel, DENSITY_CAP};
pub use gate::{pauli_gates, Gate};
pub use hadamard::{hadamard_test, hadamard_test_shots};
pub use state::{
    apply_gate_to, gate_to_dense, measurement_basis_change, pauli_rotation_circuit, sample_counts, ShotEstimate,
    StateVector, POSTSELECT_FLOOR, STATE_CAP,
};

pub(crate) use state::{sample_distribution, shot_sigma};
