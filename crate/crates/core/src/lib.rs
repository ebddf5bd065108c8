//! Magnus-expansion analysis of the Mølmer–Sørensen entangling gate.
//!
//! The crate builds the dimensionless gate Hamiltonian in a truncated
//! qubit ⊗ Fock space, evaluates nested resonance integrals exactly,
//! assembles Magnus terms up to fifth order, and compares the resulting
//! propagators against a brute-force time-ordered product.

pub mod budget;
pub mod config;
pub mod error;
pub mod fidelity;
pub mod hilbert;
pub mod magnus;
pub mod params;
pub mod pulses;
pub mod resint;
pub mod sweep;
pub mod trotter;

pub use config::{Propagator, SweepConfig};
pub use error::{Error, Result};
pub use magnus::{MagnusSeries, MagnusTerm, TruncatedPropagator};
pub use params::{GateParams, ValidationReport};
pub use pulses::PulseShape;
pub use sweep::{run_sweep, SweepOutput, SweepRow};
