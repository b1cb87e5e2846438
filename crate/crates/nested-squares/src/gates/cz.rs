//! Logical CZ: the target's Z-bar parity flips the control's X-bar. Vertically
//! each pair (P2i, P2i') talks directly; horizontally the parities of P0 and P2
//! are relayed to P4' through the ancillas, which are then measured in the X
//! basis.

use crate::code::NestedSquaresCode;
use crate::engine::GateOp;
use crate::error::{NsqError, Result};
use crate::gates::primitives::cnot_c;
use crate::gates::system::{Orientation, TwoSystemLayout, CONTROL, TARGET};
use crate::gates::traverse::cnot_traversal;
use crate::gates::wrappers::{b, b_dag, w};
use crate::layout::Slot;
use crate::pauli::{Letter, PauliOperator};
use crate::program::{Program, ProgramBuilder};
use crate::schedule::{GateSchedule, Locality};
use crate::syndrome_circuit::SyndromeRecord;

/// Vertical CZ. `record` supplies `m5, m4` for the control system; `sigma_Z` is
/// applied first so that `s4, s5` act trivially.
pub fn logical_cz_vertical(record: Option<&SyndromeRecord>) -> Result<GateSchedule> {
    let record = record.ok_or(NsqError::MissingRecord)?;
    let sys = TwoSystemLayout::new(Orientation::Vertical, false);
    let l = sys.layout.clone();
    let mut s = GateSchedule::new("cz-vertical", l.clone(), sys.adjacency.clone(), Locality::NearestNeighbor);
    let (m5, m4) = record.m.z_part();
    let sz = NestedSquaresCode::new().sigma_z(m5, m4);
    s.block("sigma-z");
    if !sz.is_identity_up_to_phase() {
        let on_control = sz.embed(l.n_qubits(), &sys.control_qubits())?;
        s.push(GateOp::from_register_pauli("sigma_Z", &on_control))?;
    }
    for (t, c) in TARGET.iter().zip(CONTROL) {
        s.block(format!("open {t}"));
        s.push_all(b_dag(&l, c)?)?;
        s.push_all(w(&l, t)?)?;
        cnot_traversal(&mut s, &format!("flip {t}"), t, c, &[(t, Slot::Y), (c, Slot::X), (t, Slot::Y)])?;
        s.block(format!("close {t}"));
        s.push_all(b(&l, c)?)?;
        s.push_all(w(&l, t)?)?;
    }
    Ok(s)
}

/// X-basis readout of an ancilla; outcome 1 leaves `Z_c` on `source`.
pub(crate) fn readout(b: &mut ProgramBuilder, ancilla: &str, source: &str) -> Result<()> {
    let l = b.layout();
    let kick = PauliOperator::single(l.n_qubits(), l.qubit(source, Slot::C)?, Letter::Z);
    b.measure(ancilla, true, Some(kick), &format!("{ancilla} for {source}"))
}

const RELAY_MOVES: [(&str, Slot); 3] = [("P3", Slot::Y), ("P4'", Slot::X), ("P3", Slot::Y)];

pub(crate) fn copy_moves(anc: &str) -> [(&str, Slot); 4] {
    [(anc, Slot::X), (anc, Slot::Y), (anc, Slot::X), (anc, Slot::Y)]
}

/// Horizontal CZ as a program over `[P0, P2, P4, P0', P2', P4', P1, P3]`.
/// Ancillas must start in `|0,00>`.
pub fn logical_cz_horizontal() -> Result<Program> {
    let sys = TwoSystemLayout::new(Orientation::Horizontal, true);
    let l = sys.layout.clone();
    let mut bld = ProgramBuilder::new("cz-horizontal", l.clone(), sys.adjacency, Locality::NextNearestNeighbor);
    let s = bld.gates();
    s.block("open P4'");
    s.push_all(b_dag(&l, "P4'")?)?;

    // (i) P4 -> P4'
    s.block("wrap P4");
    s.push_all(w(&l, "P4")?)?;
    cnot_traversal(s, "(i) P4 -> P4'", "P4", "P4'", &[("P4", Slot::Y), ("P4", Slot::X), ("P4", Slot::Y)])?;
    s.block("unwrap P4");
    s.push_all(w(&l, "P4")?)?;

    // (ii) P2 -> P3, (iii) P3 -> P4'
    s.block("wrap P2");
    s.push_all(w(&l, "P2")?)?;
    cnot_traversal(s, "(ii) P2 -> P3", "P2", "P3", &copy_moves("P3"))?;
    cnot_traversal(s, "(iii) P3 -> P4'", "P3", "P4'", &RELAY_MOVES)?;
    readout(&mut bld, "P3", "P2")?;
    let s = bld.gates();
    s.block("unwrap P2");
    s.push_all(w(&l, "P2")?)?;

    // (ii) P0 -> P1, (iv) P1 -> P3, (iii) P3 -> P4'
    s.block("wrap P0");
    s.push_all(w(&l, "P0")?)?;
    cnot_traversal(s, "(ii) P0 -> P1", "P0", "P1", &copy_moves("P1"))?;
    s.block("(iv) P1 -> P3");
    s.push(cnot_c(&l, "P1", "P3")?)?;
    cnot_traversal(s, "(iii) P3 -> P4'", "P3", "P4'", &RELAY_MOVES)?;
    readout(&mut bld, "P1", "P0")?;
    readout(&mut bld, "P3", "P0")?;
    let s = bld.gates();
    s.block("unwrap P0");
    s.push_all(w(&l, "P0")?)?;
    s.block("close P4'");
    s.push_all(b(&l, "P4'")?)?;
    bld.finish()
}

/// CZ for either orientation as a program over that orientation's layout.
pub fn logical_cz(o: Orientation, record: Option<&SyndromeRecord>) -> Result<Program> {
    match o {
        Orientation::Vertical => Ok(Program::from_schedule(logical_cz_vertical(record)?)),
        Orientation::Horizontal => logical_cz_horizontal(),
    }
}
