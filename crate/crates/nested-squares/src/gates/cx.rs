//! Logical CX and its square root between two aligned systems. The control is
//! the primed system; only P4 and P4' take part.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gates::primitives::{cs_vertex_phase, h, x, Vertex};
use crate::gates::system::{Orientation, TwoSystemLayout};
use crate::gates::traverse::{cnot_traversal, controlled_particle, traversal};
use crate::gates::wrappers::{a, a_dag, b, b_dag, hhh_gates};
use crate::layout::Slot;
use crate::linalg::{mat_s, mat_x, CMat};
use crate::schedule::{GateSchedule, Locality};

/// Moves that walk P4 and P4' past each other.
pub fn pair_moves(o: Orientation) -> [(&'static str, Slot); 3] {
    match o {
        Orientation::Horizontal => [("P4", Slot::Y), ("P4", Slot::X), ("P4", Slot::Y)],
        Orientation::Vertical => [("P4", Slot::Y), ("P4'", Slot::X), ("P4", Slot::Y)],
    }
}

fn schedule(name: String, o: Orientation) -> (TwoSystemLayout, GateSchedule) {
    let sys = TwoSystemLayout::new(o, false);
    let s = GateSchedule::new(name, sys.layout.clone(), sys.adjacency.clone(), Locality::NearestNeighbor);
    (sys, s)
}

/// `(A^dag x B) CNOT_c(P4' -> P4) (A x B^dag)`: a conditional `XXX` on P4 keyed
/// by the `XXX` eigenvalue of P4'.
pub fn logical_cx(o: Orientation) -> Result<GateSchedule> {
    let (sys, mut s) = schedule(format!("cx-{}", o.name()), o);
    let l = sys.layout;
    s.block("open");
    s.push_all(a(&l, "P4'")?)?;
    s.push_all(b_dag(&l, "P4")?)?;
    cnot_traversal(&mut s, "flip", "P4'", "P4", &pair_moves(o))?;
    s.block("close");
    s.push_all(a_dag(&l, "P4'")?)?;
    s.push_all(b(&l, "P4")?)?;
    Ok(s)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SqrtCxVariant {
    /// Phase count `x + y` at each vertex.
    #[default]
    Standard,
    /// Phase count `x + (1 - y)`, with an `X_y` folded into the P4 wrapper.
    Reduced,
}

impl SqrtCxVariant {
    fn phases(self) -> impl Fn(Vertex) -> u8 {
        move |(vx, vy)| match self {
            SqrtCxVariant::Standard => vx + vy,
            SqrtCxVariant::Reduced => vx + (1 - vy),
        }
    }

    fn target_ops(self) -> [CMat; 3] {
        let s = mat_s();
        let xsx = mat_x() * &s * mat_x();
        match self {
            SqrtCxVariant::Standard => [s.clone(), s.clone(), s],
            SqrtCxVariant::Reduced => [s.clone(), s, xsx],
        }
    }
}

/// `sum_p Pi_p(XXX)_{P4'} (VVV)^p_{P4}` with `V = H S H`, so two applications
/// give the logical CX.
pub fn logical_sqrt_cx(o: Orientation, variant: SqrtCxVariant) -> Result<GateSchedule> {
    let (sys, mut s) = schedule(format!("sqrt-cx-{}", o.name()), o);
    let l = sys.layout;
    s.block("open");
    s.push_all(a(&l, "P4'")?)?;
    s.push_all(hhh_gates(&l, "P4")?)?;
    if variant == SqrtCxVariant::Reduced {
        s.push(x(&l, "P4", Slot::Y)?)?;
    }
    let mut targets = l.qubits_of("P4'")?.to_vec();
    targets.extend(l.qubits_of("P4")?);
    let ll = l.clone();
    traversal(
        &mut s,
        "phase",
        ("P4'", "P4"),
        || cs_vertex_phase(&ll, "P4'", "P4", variant.phases()),
        &[("P4'", Slot::X), ("P4'", Slot::Y), ("P4'", Slot::X)],
        targets,
        controlled_particle(variant.target_ops()),
    )?;
    s.block("close");
    if variant == SqrtCxVariant::Reduced {
        s.push(x(&l, "P4", Slot::Y)?)?;
    }
    s.push_all(a_dag(&l, "P4'")?)?;
    s.push_all(Slot::ALL.iter().map(|&sl| h(&l, "P4", sl)).collect::<Result<Vec<_>>>()?)?;
    Ok(s)
}
