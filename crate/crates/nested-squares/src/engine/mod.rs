//! Dense statevector and density-matrix simulation over particle registers.

pub mod gate;
pub mod kernels;
mod kraus;
pub mod measure;
mod state;

pub use gate::{compose, conjugate_pauli, matrix_to_pauli, GateInfo, GateKind, GateOp};
pub use kraus::KrausOp;
pub use measure::{enumerate, enumerate_density, measure, validate_projectors, Branch, Projector, DEGENERATE_PROB};
pub use state::{DensityMatrix, StateDump, StateVector, MAX_DENSITY_QUBITS, MAX_STATE_QUBITS};
