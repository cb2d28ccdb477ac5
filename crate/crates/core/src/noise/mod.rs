//! Noisy execution and error mitigation.
//!
//! Circuits run on a density matrix with incoherent channels after every
//! gate ([`run_noisy`]). Three mitigation protocols sit on top: affine
//! readout calibration and inversion, Richardson zero-noise extrapolation
//! over rate-scaled models, and symmetry post-selection on parity checks.

mod model;
mod postselect;
mod readout;
mod zne;

pub use model::{run_noisy, run_noisy_density, NoiseModel, NoisyRun};
pub use postselect::{
    diagonal_expectation, number_parity_checks, post_select, post_select_counts, symmetry_verified_energy, ParityCheck,
    PostSelection, SymmetryVerifiedEnergy,
};
pub use readout::{
    apply_readout, calibrate_readout, calibration_circuits, mitigate_readout, product_confusion_matrix,
    project_to_simplex, total_variation, ReadoutCalibration, ReadoutMitigation, CONDITION_WARNING, ENTRY_TOLERANCE,
};
pub use zne::{richardson_weights, zne, ZneResult};
