use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{NsqError, Result};

/// Qubit within a particle: spin, x-axis position, y-axis position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    C = 0,
    X = 1,
    Y = 2,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::C, Slot::X, Slot::Y];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn suffix(self) -> char {
        match self {
            Slot::C => 'c',
            Slot::X => 'x',
            Slot::Y => 'y',
        }
    }

    pub fn from_suffix(c: char) -> Option<Slot> {
        match c {
            'c' => Some(Slot::C),
            'x' => Some(Slot::X),
            'y' => Some(Slot::Y),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Physical,
    Ancillary,
    Mediator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Particle {
    pub id: String,
    pub role: Role,
}

/// Ordered particle list. Particle k owns qubits 3k (c), 3k+1 (x), 3k+2 (y).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    particles: Vec<Particle>,
}

impl RegisterLayout {
    pub fn new(particles: Vec<Particle>) -> Result<Self> {
        for (i, p) in particles.iter().enumerate() {
            if p.id.is_empty() || p.id.contains(['@', '*', '.', ' ']) {
                return Err(NsqError::Layout(format!("bad particle id {:?}", p.id)));
            }
            if particles[..i].iter().any(|q| q.id == p.id) {
                return Err(NsqError::Layout(format!("duplicate particle {}", p.id)));
            }
        }
        Ok(RegisterLayout { particles })
    }

    /// Build from `(id, role)` pairs.
    pub fn from_ids(ids: &[(&str, Role)]) -> Result<Self> {
        Self::new(
            ids.iter()
                .map(|(id, role)| Particle {
                    id: id.to_string(),
                    role: *role,
                })
                .collect(),
        )
    }

    /// `[P0, P2, P4]`, the nine-qubit code register.
    pub fn physical() -> Self {
        Self::from_ids(&[
            ("P0", Role::Physical),
            ("P2", Role::Physical),
            ("P4", Role::Physical),
        ])
        .expect("static layout")
    }

    /// `[P0, P1, P2, P3, P4]`, used by syndrome rounds.
    pub fn with_ancillas() -> Self {
        Self::from_ids(&[
            ("P0", Role::Physical),
            ("P1", Role::Ancillary),
            ("P2", Role::Physical),
            ("P3", Role::Ancillary),
            ("P4", Role::Physical),
        ])
        .expect("static layout")
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        3 * self.particles.len()
    }

    pub fn position(&self, id: &str) -> Result<usize> {
        self.particles
            .iter()
            .position(|p| p.id == id)
            .ok_or_else(|| NsqError::UnknownParticle(id.to_string()))
    }

    pub fn qubit(&self, id: &str, slot: Slot) -> Result<usize> {
        Ok(3 * self.position(id)? + slot.index())
    }

    /// The three qubits `[c, x, y]` of a particle.
    pub fn qubits_of(&self, id: &str) -> Result<[usize; 3]> {
        let b = 3 * self.position(id)?;
        Ok([b, b + 1, b + 2])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.particles.iter().any(|p| p.id == id)
    }

    /// Inverse of `qubit`.
    pub fn locate(&self, q: usize) -> Option<(&str, Slot)> {
        let p = self.particles.get(q / 3)?;
        Some((p.id.as_str(), Slot::ALL[q % 3]))
    }

    /// Concatenate two layouts; the second one's qubits come after the first's.
    pub fn concat(&self, other: &RegisterLayout) -> Result<Self> {
        let mut v = self.particles.clone();
        v.extend(other.particles.iter().cloned());
        Self::new(v)
    }
}

impl fmt::Display for RegisterLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<&str> = self.particles.iter().map(|p| p.id.as_str()).collect();
        write!(f, "[{}]", ids.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn physical_indexing() {
        let l = RegisterLayout::physical();
        assert_eq!(l.n_qubits(), 9);
        assert_eq!(l.qubit("P0", Slot::C).unwrap(), 0);
        assert_eq!(l.qubit("P2", Slot::X).unwrap(), 4);
        assert_eq!(l.qubit("P4", Slot::Y).unwrap(), 8);
        assert_eq!(l.locate(5), Some(("P2", Slot::Y)));
    }

    #[test]
    fn bijection() {
        let l = RegisterLayout::with_ancillas();
        for q in 0..l.n_qubits() {
            let (id, s) = l.locate(q).unwrap();
            assert_eq!(l.qubit(id, s).unwrap(), q);
        }
    }

    #[test]
    fn duplicate_rejected() {
        assert!(RegisterLayout::from_ids(&[("P0", Role::Physical), ("P0", Role::Physical)]).is_err());
    }
}
