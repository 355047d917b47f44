//! Incompatibility monotones for pairs of binary quantum measurements.
//!
//! The central quantity is `I_a(M, N)`: the least deformation `mu` for which
//! the joint-measurement constraints `G_ij + mu a_ij I >= 0` become feasible.
//! It is computed by [`sdp::solve_incompat`] and cross-checked against
//! closed forms for qubits ([`qubit`]), the angle-spectrum reduction for
//! projections ([`spectral`]) and CHSH-type dual witnesses ([`chsh`]).

pub mod chsh;
pub mod cli;
pub mod circuit;
pub mod error;
pub mod game;
pub mod linalg;
pub mod povm;
pub mod qubit;
pub mod sdp;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{Hermitian, Matrix};
pub use povm::{DeformationMatrix, Effect, JointCandidate, NoiseParams};
