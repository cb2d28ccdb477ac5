//! Hamiltonian dynamics: product formulas, low-rank steps, LCU and
//! amplitude amplification, truncated Taylor series, qubitization, phase
//! estimation, adiabatic preparation and correlation functions.
//!
//! Time evolution is `exp(-iHt)` throughout; spectral norms are computed
//! densely.

mod asp;
mod correlation;
mod lcu;
mod lowrank;
mod qpe;
mod qubiterate;
mod report;
mod taylor;
mod trotter;

pub use asp::{adiabatic_prepare, fock_matrix, fock_path, AspReport};
pub use correlation::{
    correlation_function, correlation_function_circuit, spectral_function, CorrelationSeries, Spectrum,
};
pub use lcu::{
    lcu_apply, lcu_sample_success, oaa_amplify, oaa_probability, LcuDecomposition, LcuOutcome, OaaOutcome,
};
pub use lowrank::{lowrank_dense_hamiltonian, lowrank_trotter_evolve, lowrank_trotter_step};
pub use qpe::{phase_to_energy, qft_circuit, qpe, qpe_circuit, qpe_energy, shifted_unitary, QpeResult};
pub use qubiterate::{build_qubiterate, phase_multiset_distance, QubiterateReport};
pub use report::EvolutionReport;
pub use taylor::{taylor_bound, taylor_evolve, taylor_order_for, taylor_segments, taylor_tail};
pub use trotter::{
    gamma_first_order, gamma_second_order, product_formula, single_term_grouping, suzuki_coefficient,
    trotter_circuit, trotter_error_bound, trotter_evolve, trotter_operator_error, trotter_terms,
    trotter_unitary,
};
