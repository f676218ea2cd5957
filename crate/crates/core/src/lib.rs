//! Exact and dense-numerical procedures for matrix product states, matrix
//! product operators and small PEPS.
//!
//! The crate is organised bottom-up: [`linalg`] provides dense complex
//! linear algebra and integer normal forms, [`mps`] the uniform MPS type and
//! its transfer operator, [`structure`] canonical forms and the same-state
//! decision procedure, [`symmetry`] projective symmetry data and SPT labels,
//! [`hamiltonian`] parent Hamiltonians and gap certificates, [`mpo`] matrix
//! product operators and unitaries, [`peps`] exact small-lattice PEPS
//! analyses, and [`corpus`] the catalogue of standard example tensors.

pub mod corpus;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod linalg;
pub mod mpo;
pub mod mps;
pub mod peps;
pub mod structure;
pub mod symmetry;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::{c64, CMat, CVec, C64};
