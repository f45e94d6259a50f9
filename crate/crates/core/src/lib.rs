//! Finite-dimensional quantum-mechanics workbench.
//!
//! The crate is layered bottom-up:
//!
//! - [`hilbert`]: kets, Hermitian operators, projectors, PVMs, density matrices
//! - [`dynamics`]: Schrödinger and Heisenberg propagation for constant `Ĥ`
//! - [`measurement`]: the statistical formula, moral collapse, sequential sampling
//! - [`logic`]: the projection lattice, Gleason fits, dispersion-free refutations
//! - [`histories`]: alternative-history sets and the decoherence functional
//! - [`interpretations`]: scenario engines built on the layers above

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod histories;
pub mod interpretations;
pub mod linalg;
pub mod logic;
pub mod measurement;
pub mod random;

pub use error::{Error, Result};
pub use hilbert::{
    is_product_state, joint_hamiltonian, pvm_from_hermitian, spin, spin_half_operators, tensor,
    DensityMatrix, HermitianOperator, Interval, OutcomeSet, ProjectionValuedMeasure, Projector,
    StateVector, Tensor,
};
pub use linalg::{CMatrix, CVector, C64};
