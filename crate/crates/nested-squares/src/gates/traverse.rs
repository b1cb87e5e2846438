use crate::engine::GateOp;
use crate::error::{NsqError, Result};
use crate::layout::Slot;
use crate::linalg::{kron_le, mat_x, CMat};
use crate::pauli::{Letter, PauliOperator};
use crate::schedule::GateSchedule;

use super::primitives::controlled;

/// Interleave `gate` with `moves`: a gate before every move, plus a closing gate
/// when there are only three moves. The relative offset of the two particles at
/// the gates must take all four values, so the gate fires once on every branch.
/// The block is declared as `residual * ideal`, with the residual the net move.
pub fn traversal(
    s: &mut GateSchedule,
    label: &str,
    pair: (&str, &str),
    gate: impl Fn() -> Result<GateOp>,
    moves: &[(&str, Slot)],
    ideal_targets: Vec<usize>,
    ideal: CMat,
) -> Result<PauliOperator> {
    if moves.len() != 3 && moves.len() != 4 {
        return Err(NsqError::Schedule(format!("{label}: need three or four moves")));
    }
    let mut offset = (0u8, 0u8);
    let mut seen = Vec::new();
    for (p, slot) in moves {
        if *p != pair.0 && *p != pair.1 {
            return Err(NsqError::Schedule(format!("{label}: {p} is not part of the pair")));
        }
        seen.push(offset);
        match slot {
            Slot::X => offset.0 ^= 1,
            Slot::Y => offset.1 ^= 1,
            Slot::C => return Err(NsqError::Schedule(format!("{label}: spin flip is not a move"))),
        }
    }
    if moves.len() == 3 {
        seen.push(offset);
    }
    let mut sorted = seen.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != 4 {
        return Err(NsqError::Schedule(format!("{label}: offsets {seen:?} miss a vertex")));
    }
    let n = s.n_qubits();
    let mut residual = PauliOperator::identity(n);
    s.block(label);
    for (p, slot) in moves {
        s.push(gate()?)?;
        let q = s.layout().qubit(p, *slot)?;
        s.push(crate::gates::primitives::x(s.layout(), p, *slot)?)?;
        residual = residual.multiply(&PauliOperator::single(n, q, Letter::X))?;
    }
    if moves.len() == 3 {
        s.push(gate()?)?;
    }
    s.set_ideal(ideal_targets, ideal, residual)?;
    Ok(residual)
}

/// `CNOT_c` traversal whose ideal is a plain spin CNOT from `ctrl` to `tgt`.
pub fn cnot_traversal(
    s: &mut GateSchedule,
    label: &str,
    ctrl: &str,
    tgt: &str,
    moves: &[(&str, Slot)],
) -> Result<PauliOperator> {
    let layout = s.layout().clone();
    let targets = vec![layout.qubit(ctrl, Slot::C)?, layout.qubit(tgt, Slot::C)?];
    traversal(
        s,
        label,
        (ctrl, tgt),
        || crate::gates::primitives::cnot_c(&layout, ctrl, tgt),
        moves,
        targets,
        controlled(&mat_x()),
    )
}

/// `sum_p |p><p|_c (on a) (U_c U_x U_y)^p (on b)` on `[a c,x,y, b c,x,y]`.
pub fn controlled_particle(u: [CMat; 3]) -> CMat {
    let i2 = crate::linalg::identity(2);
    let p0 = crate::linalg::proj(0);
    let p1 = crate::linalg::proj(1);
    let [uc, ux, uy] = u;
    kron_le(&[p0, i2.clone(), i2.clone(), i2.clone(), i2.clone(), i2.clone()])
        + kron_le(&[p1, i2.clone(), i2, uc, ux, uy])
}
