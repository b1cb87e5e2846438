//! Single-particle basis changes that turn a conditional spin flip into a
//! three-slot Pauli conditional.
//!
//! With `W = X_c^{[01,10]}`, `A = W (H H H)` and `B = (H_x H_y) Z_c^{[01,10]}`:
//! `Pi_p(ZZZ) = W |p><p|_c W`, `Pi_p(XXX) = A^dag |p><p|_c A`, `B X_c B^dag = XXX`.

use crate::engine::GateOp;
use crate::error::Result;
use crate::gates::primitives::{h, vertex_spin, Vertex};
use crate::layout::{RegisterLayout, Slot};
use crate::linalg::{mat_x, mat_z};

pub const PARITY_VERTICES: [Vertex; 2] = [(0, 1), (1, 0)];

pub fn w(layout: &RegisterLayout, p: &str) -> Result<Vec<GateOp>> {
    Ok(vec![vertex_spin(layout, p, "X", &mat_x(), &PARITY_VERTICES)?])
}

fn z_parity(layout: &RegisterLayout, p: &str) -> Result<GateOp> {
    vertex_spin(layout, p, "Z", &mat_z(), &PARITY_VERTICES)
}

fn hhh(layout: &RegisterLayout, p: &str) -> Result<Vec<GateOp>> {
    Slot::ALL.iter().map(|&s| h(layout, p, s)).collect()
}

/// Gates of `A` in application order.
pub fn a(layout: &RegisterLayout, p: &str) -> Result<Vec<GateOp>> {
    let mut g = hhh(layout, p)?;
    g.extend(w(layout, p)?);
    Ok(g)
}

pub fn a_dag(layout: &RegisterLayout, p: &str) -> Result<Vec<GateOp>> {
    let mut g = w(layout, p)?;
    g.extend(hhh(layout, p)?);
    Ok(g)
}

pub fn b(layout: &RegisterLayout, p: &str) -> Result<Vec<GateOp>> {
    Ok(vec![z_parity(layout, p)?, h(layout, p, Slot::X)?, h(layout, p, Slot::Y)?])
}

pub fn b_dag(layout: &RegisterLayout, p: &str) -> Result<Vec<GateOp>> {
    Ok(vec![h(layout, p, Slot::X)?, h(layout, p, Slot::Y)?, z_parity(layout, p)?])
}

pub fn hhh_gates(layout: &RegisterLayout, p: &str) -> Result<Vec<GateOp>> {
    hhh(layout, p)
}
