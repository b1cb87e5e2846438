//! Simulator and verification suite for the nested-squares subsystem code.
//!
//! Three physical particles (P0, P2, P4) carry a spin and a 2x2 position each,
//! nine qubits in total. Two ancillary particles (P1, P3) measure the six
//! stabilizers by shuttling around their squares.

pub mod code;
pub mod engine;
pub mod error;
pub mod failure;
pub mod gates;
pub mod layout;
pub mod linalg;
pub mod noise;
pub mod par;
pub mod pauli;
pub mod program;
pub mod recovery;
pub mod runner;
pub mod schedule;
pub mod syndrome_circuit;

pub use error::{NsqError, Result};
pub use num_complex::Complex64 as C64;
