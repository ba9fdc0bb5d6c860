//! Finite-dimensional laboratory for comparing representations of the
//! canonical commutation relations.
//!
//! Two two-level atoms each couple to one field mode through a
//! Jaynes–Cummings interaction while a single photon is shared between the
//! modes. The crate builds the field in three representations (a two-mode
//! truncation of the infinite tensor product, the occupation-number Fock
//! space, and the reducible `N`-oscillator representation), evolves the
//! system by brute force and by closed forms, and measures entanglement
//! across declared bipartitions.

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod representations;
pub mod scenarios;
pub mod weights;

pub use error::{LabError, Result};
pub use linalg::space::{DensityMatrix, HilbertFactorization, StateVector};
pub use linalg::{ComplexMatrix, ComplexVector, C64};
