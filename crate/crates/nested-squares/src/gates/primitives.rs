//! Particle-level gate constructors. Local qubit order within a particle is (c, x, y);
//! a vertex `(x, y)` is the particle's position basis state.

use crate::engine::GateOp;
use crate::error::Result;
use crate::layout::{RegisterLayout, Slot};
use crate::linalg::{c, identity, mat_h, mat_s, mat_x, mat_z, CMat};
use crate::C64;

pub type Vertex = (u8, u8);

/// Indexed by `x | y << 1`.
pub const ALL_VERTICES: [Vertex; 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

fn vertex_of(local: usize, base: usize) -> Vertex {
    ((local >> (base + 1) & 1) as u8, (local >> (base + 2) & 1) as u8)
}

fn vname(v: &[Vertex]) -> String {
    v.iter().map(|(x, y)| format!("{x}{y}")).collect::<Vec<_>>().join(",")
}

/// Single-slot gate on one particle.
pub fn slot_gate(layout: &RegisterLayout, p: &str, slot: Slot, name: &str, m: CMat) -> Result<GateOp> {
    let q = layout.qubit(p, slot)?;
    GateOp::unitary(format!("{name}{}@{p}", slot.suffix()), vec![q], m)
}

pub fn h(layout: &RegisterLayout, p: &str, slot: Slot) -> Result<GateOp> {
    slot_gate(layout, p, slot, "H", mat_h())
}

/// Pauli X on one slot; on x or y this is a tunneling move.
pub fn x(layout: &RegisterLayout, p: &str, slot: Slot) -> Result<GateOp> {
    slot_gate(layout, p, slot, "X", mat_x())
}

pub fn z(layout: &RegisterLayout, p: &str, slot: Slot) -> Result<GateOp> {
    slot_gate(layout, p, slot, "Z", mat_z())
}

/// `H_x H_y` on one particle.
pub fn h_xy(layout: &RegisterLayout, p: &str) -> Result<[GateOp; 2]> {
    Ok([h(layout, p, Slot::X)?, h(layout, p, Slot::Y)?])
}

/// `U_c^{[vertices]}`: `u` on the spin when the particle sits on one of `vertices`.
pub fn vertex_spin(layout: &RegisterLayout, p: &str, name: &str, u: &CMat, vertices: &[Vertex]) -> Result<GateOp> {
    let q = layout.qubits_of(p)?;
    let mut m = CMat::zeros(8, 8);
    for pos in 0..4usize {
        let v = ((pos & 1) as u8, (pos >> 1 & 1) as u8);
        let active = vertices.contains(&v);
        for cin in 0..2 {
            for cout in 0..2 {
                let val = if active { u[(cout, cin)] } else if cin == cout { c(1.0, 0.0) } else { c(0.0, 0.0) };
                m[(cout | pos << 1, cin | pos << 1)] = val;
            }
        }
    }
    Ok(GateOp::unitary(format!("{name}c[{}]@{p}", vname(vertices)), q.to_vec(), m)?.with_vertices(vertices.to_vec()))
}

/// Two-particle gate acting as `m` on the spin pair (spin of `a` = bit 0) whenever
/// both particles share a position in `vertices`; identity elsewhere.
pub fn colocated(
    layout: &RegisterLayout,
    a: &str,
    b: &str,
    name: &str,
    m: &CMat,
    vertices: &[Vertex],
) -> Result<GateOp> {
    let label = if vertices.len() == 4 { String::new() } else { format!("[{}]", vname(vertices)) };
    let g = colocated_by_vertex(layout, a, b, &format!("{name}{label}"), |v| {
        vertices.contains(&v).then(|| m.clone())
    })?;
    Ok(if vertices.len() == 4 { g } else { g.with_vertices(vertices.to_vec()) })
}

/// Like `colocated`, with the spin-pair matrix chosen per shared vertex.
pub fn colocated_by_vertex(
    layout: &RegisterLayout,
    a: &str,
    b: &str,
    name: &str,
    m: impl Fn(Vertex) -> Option<CMat>,
) -> Result<GateOp> {
    let qa = layout.qubits_of(a)?;
    let qb = layout.qubits_of(b)?;
    let targets = vec![qa[0], qa[1], qa[2], qb[0], qb[1], qb[2]];
    let per_vertex: Vec<Option<CMat>> = ALL_VERTICES.iter().map(|&v| m(v)).collect();
    let mut full = CMat::zeros(64, 64);
    for col in 0..64usize {
        let va = vertex_of(col, 0);
        let vb = vertex_of(col, 3);
        let hit = if va == vb { per_vertex[(va.0 | va.1 << 1) as usize].as_ref() } else { None };
        match hit {
            Some(mv) => {
                let sin = (col & 1) | (col >> 3 & 1) << 1;
                let rest = col & !0b001001;
                for sout in 0..4usize {
                    let row = rest | (sout & 1) | (sout >> 1 & 1) << 3;
                    full[(row, col)] = mv[(sout, sin)];
                }
            }
            None => full[(col, col)] = c(1.0, 0.0),
        }
    }
    GateOp::unitary(format!("{name}({a},{b})"), targets, full)
}

/// 4x4 controlled-U on (control = bit 0, target = bit 1).
pub fn controlled(u: &CMat) -> CMat {
    let mut m = identity(4);
    for r in 0..2 {
        for cc in 0..2 {
            m[(1 | r << 1, 1 | cc << 1)] = u[(r, cc)];
        }
    }
    m
}

/// Spin-pair matrix `u` on bit 0 only.
fn on_first(u: &CMat) -> CMat {
    crate::linalg::kron_le(&[u.clone(), identity(2)])
}

/// `(CNOT_c)_{a,b}`: flip b's spin when a's spin is 1 and the positions agree.
pub fn cnot_c(layout: &RegisterLayout, a: &str, b: &str) -> Result<GateOp> {
    colocated(layout, a, b, "CNOT", &controlled(&mat_x()), &ALL_VERTICES)
}

/// `(CS_c)_{a,b}`: S on b's spin when a's spin is 1 and the positions agree.
pub fn cs_c(layout: &RegisterLayout, a: &str, b: &str) -> Result<GateOp> {
    colocated(layout, a, b, "CS", &controlled(&mat_s()), &ALL_VERTICES)
}

/// `(Cpi_c)_{a,b}`: Z on a's spin when the positions agree.
pub fn cpi_c(layout: &RegisterLayout, a: &str, b: &str) -> Result<GateOp> {
    colocated(layout, a, b, "Cpi", &on_first(&mat_z()), &ALL_VERTICES)
}

/// `(Cpi/2_c)_{a,b}`: S on a's spin when the positions agree.
pub fn chalf_c(layout: &RegisterLayout, a: &str, b: &str) -> Result<GateOp> {
    colocated(layout, a, b, "Cpi/2", &on_first(&mat_s()), &ALL_VERTICES)
}

/// Phase `e^{i theta}` on a's spin-1 component when the positions agree.
pub fn c_theta(layout: &RegisterLayout, a: &str, b: &str, theta: f64) -> Result<GateOp> {
    let mut m = identity(4);
    let ph = C64::from_polar(1.0, theta);
    m[(1, 1)] = ph;
    m[(3, 3)] = ph;
    colocated(layout, a, b, "Ctheta", &m, &ALL_VERTICES)
}

/// `CS_{a,b} (Cpi/2_{a,b})^{k(v)}` at each shared vertex `v`: S on b's spin and
/// phase `i^{k(v)}`, both when a's spin is 1.
pub fn cs_vertex_phase(layout: &RegisterLayout, a: &str, b: &str, k: impl Fn(Vertex) -> u8) -> Result<GateOp> {
    let names: Vec<String> = ALL_VERTICES
        .iter()
        .map(|&v| format!("{}{}:{}", v.0, v.1, ["CS", "CS.Cpi/2", "CS.Cpi", "CS.Cpi/2^3"][(k(v) % 4) as usize]))
        .collect();
    colocated_by_vertex(layout, a, b, &format!("[{}]", names.join(" ")), |v| {
        let mut m = controlled(&mat_s());
        let ph = crate::pauli::i_pow(k(v));
        for s in [1usize, 3] {
            m[(s, s)] *= ph;
        }
        Some(m)
    })
}
