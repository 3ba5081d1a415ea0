//! Quantum van der Pol oscillator toolkit.
//!
//! * [`fock`]: truncated Fock-space operators and states.
//! * [`lindblad`]: exact master-equation dynamics and steady states.
//! * [`trotter`]: pulse-level emulation of the trapped-ion reservoir scheme.
//! * [`tomography`]: Wigner functions and synchronization measures.

mod banded;
pub mod error;
pub mod fock;
mod integrate;
pub mod lindblad;
pub mod operator;
mod sparse;
pub mod state;
pub mod tomography;
pub mod trotter;

pub use error::{Error, Result};
pub use fock::{
    coherent_state, displaced_thermal_state, displacement_op, fock_state, ladder_ops, tensor_with_spin, vacuum,
    FockTruncation,
};
pub use lindblad::{evolve, steady_state, Trajectory, VdpParams};
pub use num_complex::Complex64;
pub use operator::{CMatrix, Operator, Space, C64};
pub use state::DensityMatrix;
