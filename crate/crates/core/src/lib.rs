//! Dense-statevector toolkit for the Trotterized quantum power method.
//!
//! Hamiltonian powers are approximated by central finite differences of
//! symmetric Suzuki-Trotter propagators, optionally Richardson-extrapolated
//! in the time step. On top of that sit block Krylov subspace
//! diagonalization, moment and cumulant estimators, and an operator-distance
//! metric.
//!
//! Qubits are labelled `1..=n`; qubit 1 is the least significant bit of the
//! basis index.
//!
//! The crate is `no_std` with `alloc`. File formats and the command line
//! live in the companion `qpower` crate.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose so NaN takes the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod lanczos;

pub mod hamiltonian;
pub mod krylov;
pub mod linalg;
pub mod metrics;
pub mod moments;
pub mod qpower;
pub mod refstates;
pub mod statevector;
pub mod trotter;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use hamiltonian::{ModelTag, PartitionedHamiltonian};
pub use qpower::{Formalism, PowerConfig, Route};
pub use statevector::{Pauli, PauliString, State};
pub use trotter::TrotterScheme;
