//! Classically emulated quantum algorithms for molecular electronic structure.
//!
//! The crate is organized bottom-up:
//!
//! - [`pauli`]: Pauli strings and sums, the operator currency of everything else.
//! - [`simulator`]: dense state vectors, density matrices, gates and circuits.
//! - [`fermion`]: second-quantized operators, qubit encodings and symmetry tapering.
//! - [`hamio`]: integral files, Pauli-sum JSON, Cholesky and Givens factorizations.
//! - [`dynamics`]: product formulas, LCU, Taylor series, qubitization, QPE,
//!   adiabatic preparation and correlation functions.
//! - [`eigen`]: variational and subspace eigensolvers.
//! - [`noise`]: noisy execution and error mitigation.
//!
//! Basis states are little-endian: qubit `l` is bit `l` of the basis index,
//! and `|z_{n-1} ... z_0>` is the printed order.

pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod fermion;
pub mod hamio;
pub mod linalg;
pub mod noise;
pub mod pauli;
pub mod simulator;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
pub use pauli::{Commutation, Pauli, PauliString, PauliSum};
