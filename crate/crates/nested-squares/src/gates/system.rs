use serde::Serialize;

use crate::error::{NsqError, Result};
use crate::layout::{RegisterLayout, Role};
use crate::schedule::Adjacency;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

impl Orientation {
    pub const ALL: [Orientation; 2] = [Orientation::Horizontal, Orientation::Vertical];

    pub fn name(self) -> &'static str {
        match self {
            Orientation::Horizontal => "horizontal",
            Orientation::Vertical => "vertical",
        }
    }
}

pub const TARGET: [&str; 3] = ["P0", "P2", "P4"];
pub const CONTROL: [&str; 3] = ["P0'", "P2'", "P4'"];

/// Two code blocks side by side. The target system `{P0, P2, P4}` takes qubits
/// 0..9 and the control system `{P0', P2', P4'}` qubits 9..18; the target's
/// ancillas, when present, follow.
#[derive(Debug, Clone)]
pub struct TwoSystemLayout {
    pub orientation: Orientation,
    pub layout: RegisterLayout,
    pub adjacency: Adjacency,
}

impl TwoSystemLayout {
    pub fn new(orientation: Orientation, with_ancillas: bool) -> Self {
        let mut ids: Vec<(&str, Role)> = TARGET
            .iter()
            .chain(CONTROL.iter())
            .map(|id| (*id, Role::Physical))
            .collect();
        if with_ancillas {
            ids.extend([("P1", Role::Ancillary), ("P3", Role::Ancillary)]);
        }
        TwoSystemLayout {
            orientation,
            layout: RegisterLayout::from_ids(&ids).expect("static layout"),
            adjacency: pair_adjacency(orientation),
        }
    }

    pub fn target_qubits(&self) -> Vec<usize> {
        (0..9).collect()
    }

    pub fn control_qubits(&self) -> Vec<usize> {
        (9..18).collect()
    }

    pub fn require(&self, id: &str) -> Result<()> {
        if self.layout.contains(id) {
            Ok(())
        } else {
            Err(NsqError::Layout(format!("layout has no particle {id}")))
        }
    }
}

/// Allowed interactions for two aligned systems.
pub fn pair_adjacency(orientation: Orientation) -> Adjacency {
    let base = Adjacency::chain(&["P0", "P1", "P2", "P3", "P4"]).merge(&Adjacency::chain(&["P0'", "P1'", "P2'", "P3'", "P4'"]));
    match orientation {
        // P3 faces P4' across the gap the same way P4 faces P3'.
        Orientation::Horizontal => base
            .nearest("P4", "P4'")
            .next_nearest("P4", "P3'")
            .next_nearest("P3", "P4'")
            .next_nearest("P1", "P3")
            .next_nearest("P1'", "P3'"),
        Orientation::Vertical => base.nearest("P0", "P0'").nearest("P2", "P2'").nearest("P4", "P4'"),
    }
}

/// One system, its ancillas and a mediator square next to P4.
pub fn mediator_layout() -> (RegisterLayout, Adjacency) {
    let layout = RegisterLayout::from_ids(&[
        ("P0", Role::Physical),
        ("P2", Role::Physical),
        ("P4", Role::Physical),
        ("P1", Role::Ancillary),
        ("P3", Role::Ancillary),
        ("M", Role::Mediator),
    ])
    .expect("static layout");
    let adj = Adjacency::chain(&["P0", "P1", "P2", "P3", "P4", "M"])
        .next_nearest("P3", "M")
        .next_nearest("P1", "P3");
    (layout, adj)
}
