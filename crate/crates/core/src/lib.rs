//! Simulation of Wigner process tomography with DROPS (discrete
//! representation of operators for spin systems) for one or two qubits.

pub mod diagnostics;
pub mod drops;
pub mod error;
pub mod gates;
pub mod pulse;
pub mod recon;
pub mod spinop;
pub mod tensors;
pub mod tomo;

pub use error::{DropsError, Result};
