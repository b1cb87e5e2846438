//! Two-system logical gates built from particle-level primitives.

pub mod primitives;
pub mod system;
pub mod traverse;
pub mod wrappers;
pub mod cx;
pub mod verify;
pub mod cz;
pub mod hadamard;
pub mod toffoli;
