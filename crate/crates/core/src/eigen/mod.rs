//! Eigenstate solvers: variational minimization over parameterized
//! circuits, adaptive operator selection, McLachlan variational dynamics and
//! the subspace family (QSE, QFD, qEOM, quantum Lanczos) plus QITE.
//!
//! Subspace problems are regularized by canonical orthogonalization with a
//! caller-chosen overlap cutoff, [`SUBSPACE_CUTOFF`] by default.

mod adapt;
mod ansatz;
mod estimator;
mod hadamard;
mod optimize;
mod qite;
mod subspace;
mod vqe;
mod vqs;

pub use adapt::{adapt_select, adapt_vqe, AdaptResult, AdaptSelection};
pub use ansatz::{adaptive_ansatz, hardware_efficient_ansatz, uccsd_ansatz, uccsd_excitations, uccsd_generators, Ansatz, AnsatzKind};
pub use estimator::{EnergyEstimator, EstimationMode};
pub use hadamard::{hadamard_matrix_element, hadamard_matrix_element_shots, MatrixElement};
pub use optimize::{minimize, write_trace_csv, Objective, Optimization, OptimizerConfig, OptimizerKind, TraceRow};
pub use qite::{domain_paulis, qite, qite_step, qite_step_with, QiteStep, QiteTrajectory, QITE_FITS};
pub use subspace::{
    fermionic_excitations, pauli_excitations, qeom, qfd, qlanczos, qse, ImaginaryTimeSource, Propagation, QeomResult,
    SubspaceProblem, SubspaceResult, SUBSPACE_CUTOFF,
};
pub use vqe::{parameter_shift_gradient, vqe_minimize, VqeResult};
pub use vqs::{mclachlan_system, vqs_evolve, vqs_step, Integrator, VqsStep, VqsTrajectory, VQS_REGULARIZATION};
