//! Logical Hadamard by one-bit teleportation through a mediator particle M next
//! to P4. M starts in `|0,00>`:
//!
//! 1. relay the Z-bar parity onto M's spin (as in horizontal CZ, with M in the
//!    place of P4'), which leaves `sum_b |b>_M Zbar^b |psi>` after `H_c` on M;
//! 2. flip M on the X-bar eigenvalue: the system resets to `|0bar>` and M holds
//!    `H psi`;
//! 3. flip X-bar on M's spin, then read M in the X basis. Outcome k leaves
//!    `Zbar^k` in the frame.

use rand::Rng;

use crate::engine::StateVector;
use crate::error::{NsqError, Result};
use crate::gates::cz::{copy_moves, readout};
use crate::gates::primitives::{cnot_c, h};
use crate::gates::system::mediator_layout;
use crate::gates::traverse::cnot_traversal;
use crate::gates::wrappers::{a, a_dag, b, b_dag, w};
use crate::layout::Slot;
use crate::pauli::PauliOperator;
use crate::program::{Program, ProgramBranch, ProgramBuilder};
use crate::schedule::Locality;

/// M walks all four vertices around a stationary partner and returns home.
const M_LOOP: [(&str, Slot); 4] = [("M", Slot::X), ("M", Slot::Y), ("M", Slot::X), ("M", Slot::Y)];
const RELAY_TO_M: [(&str, Slot); 4] = [("P3", Slot::Y), ("M", Slot::X), ("P3", Slot::Y), ("M", Slot::X)];

pub fn hadamard_program() -> Result<Program> {
    let (l, adj) = mediator_layout();
    let n = l.n_qubits();
    let mut bld = ProgramBuilder::new("hadamard", l.clone(), adj, Locality::NextNearestNeighbor);

    let s = bld.gates();
    s.block("wrap P4");
    s.push_all(w(&l, "P4")?)?;
    cnot_traversal(s, "P4 -> M", "P4", "M", &M_LOOP)?;
    s.block("unwrap P4");
    s.push_all(w(&l, "P4")?)?;

    s.block("wrap P2");
    s.push_all(w(&l, "P2")?)?;
    cnot_traversal(s, "P2 -> P3", "P2", "P3", &copy_moves("P3"))?;
    cnot_traversal(s, "P3 -> M", "P3", "M", &RELAY_TO_M)?;
    readout(&mut bld, "P3", "P2")?;
    let s = bld.gates();
    s.block("unwrap P2");
    s.push_all(w(&l, "P2")?)?;

    s.block("wrap P0");
    s.push_all(w(&l, "P0")?)?;
    cnot_traversal(s, "P0 -> P1", "P0", "P1", &copy_moves("P1"))?;
    s.block("P1 -> P3");
    s.push(cnot_c(&l, "P1", "P3")?)?;
    cnot_traversal(s, "P3 -> M", "P3", "M", &RELAY_TO_M)?;
    readout(&mut bld, "P1", "P0")?;
    readout(&mut bld, "P3", "P0")?;
    let s = bld.gates();
    s.block("unwrap P0");
    s.push_all(w(&l, "P0")?)?;

    s.block("rotate M");
    s.push(h(&l, "M", Slot::C)?)?;

    s.block("open X-bar");
    s.push_all(a(&l, "P4")?)?;
    cnot_traversal(s, "X-bar -> M", "P4", "M", &M_LOOP)?;
    s.block("close X-bar");
    s.push_all(a_dag(&l, "P4")?)?;

    s.block("open flip");
    s.push_all(b_dag(&l, "P4")?)?;
    cnot_traversal(s, "M -> X-bar", "M", "P4", &M_LOOP)?;
    s.block("close flip");
    s.push_all(b(&l, "P4")?)?;

    let z_bar = PauliOperator::z_type(n, &(0..9).collect::<Vec<_>>());
    bld.measure("M", true, Some(z_bar), "M")?;
    bld.finish()
}

/// One sampled run on a 9-qubit code state. The mediator and ancillas are
/// appended in `|0,00>`.
pub fn logical_hadamard<R: Rng + ?Sized>(system: &StateVector, rng: &mut R) -> Result<ProgramBranch> {
    if system.n_qubits() != 9 {
        return Err(NsqError::WidthMismatch(system.n_qubits(), 9));
    }
    let p = hadamard_program()?;
    let psi = system.embed(p.layout().clone())?;
    p.run(&psi, rng)
}
