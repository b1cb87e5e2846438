use super::PauliOperator;
use crate::error::{NsqError, Result};

fn row_of(p: &PauliOperator) -> u128 {
    (p.xmask() as u128) | ((p.zmask() as u128) << 64)
}

#[derive(Debug, Clone)]
struct Row {
    bits: u128,
    combo: u128,
}

/// Which generators multiply to a member, and the leftover phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    /// Generator indices, ascending; the product is taken in this order.
    pub indices: Vec<usize>,
    /// `p = i^phase * prod(generators[indices])`.
    pub phase: u8,
}

/// Group generated by a list of Pauli operators, with a GF(2) reduced basis.
#[derive(Debug, Clone)]
pub struct PauliGroup {
    width: usize,
    generators: Vec<PauliOperator>,
    reduced: Vec<Row>,
    /// Exponents k such that i^k I lies in the group, as a bitmask over {0,1,2,3}.
    central: u8,
}

impl PauliGroup {
    pub fn new(width: usize, generators: Vec<PauliOperator>) -> Result<Self> {
        if generators.len() > 128 {
            return Err(NsqError::Other("at most 128 generators".into()));
        }
        for g in &generators {
            if g.width() != width {
                return Err(NsqError::WidthMismatch(width, g.width()));
            }
        }
        let mut rows: Vec<Row> = generators
            .iter()
            .enumerate()
            .map(|(i, g)| Row {
                bits: row_of(g),
                combo: 1u128 << i,
            })
            .collect();
        let mut reduced: Vec<Row> = Vec::new();
        let mut dependencies = Vec::new();
        for mut r in rows.drain(..) {
            for b in &reduced {
                let pivot = 127 - b.bits.leading_zeros();
                if r.bits >> pivot & 1 == 1 {
                    r.bits ^= b.bits;
                    r.combo ^= b.combo;
                }
            }
            if r.bits == 0 {
                dependencies.push(r.combo);
                continue;
            }
            let pivot = 127 - r.bits.leading_zeros();
            for b in reduced.iter_mut() {
                if b.bits >> pivot & 1 == 1 {
                    b.bits ^= r.bits;
                    b.combo ^= r.combo;
                }
            }
            reduced.push(r);
        }

        let mut central_gen: Vec<u8> = Vec::new();
        for (i, a) in generators.iter().enumerate() {
            let sq = a.multiply(a)?;
            central_gen.push(sq.phase());
            for b in &generators[i + 1..] {
                if a.symplectic(b) == 1 {
                    central_gen.push(2);
                }
            }
        }
        let mut g = PauliGroup {
            width,
            generators,
            reduced,
            central: 1,
        };
        for c in dependencies {
            let p = g.product_of(c)?;
            central_gen.push(p.phase());
        }
        let mut central = 1u8;
        for k in central_gen {
            for _ in 0..4 {
                let mut next = central;
                for e in 0..4u8 {
                    if central >> e & 1 == 1 {
                        next |= 1 << ((e + k) & 3);
                    }
                }
                central = next;
            }
        }
        g.central = central;
        Ok(g)
    }

    fn product_of(&self, combo: u128) -> Result<PauliOperator> {
        let mut p = PauliOperator::identity(self.width);
        for (i, g) in self.generators.iter().enumerate() {
            if combo >> i & 1 == 1 {
                p = p.multiply(g)?;
            }
        }
        Ok(p)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.reduced.len()
    }

    /// Whether -I is a member (true for non-abelian groups).
    pub fn contains_minus_identity(&self) -> bool {
        self.central >> 2 & 1 == 1
    }

    /// Reduced basis as operators (each a product of generators).
    pub fn reduced_basis(&self) -> Vec<PauliOperator> {
        self.reduced
            .iter()
            .map(|r| self.product_of(r.combo).expect("widths checked"))
            .collect()
    }

    /// Decompose `p` over the generators if it lies in the group.
    pub fn decompose(&self, p: &PauliOperator, ignore_phase: bool) -> Result<Option<Decomposition>> {
        if p.width() != self.width {
            return Err(NsqError::WidthMismatch(self.width, p.width()));
        }
        let mut bits = row_of(p);
        let mut combo = 0u128;
        for r in &self.reduced {
            let pivot = 127 - r.bits.leading_zeros();
            if bits >> pivot & 1 == 1 {
                bits ^= r.bits;
                combo ^= r.combo;
            }
        }
        if bits != 0 {
            return Ok(None);
        }
        let prod = self.product_of(combo)?;
        let phase = (p.phase() + 4 - prod.phase()) & 3;
        if !ignore_phase && self.central >> phase & 1 == 0 {
            return Ok(None);
        }
        let indices = (0..self.generators.len())
            .filter(|i| combo >> i & 1 == 1)
            .collect();
        Ok(Some(Decomposition { indices, phase }))
    }

    pub fn contains(&self, p: &PauliOperator, ignore_phase: bool) -> Result<bool> {
        Ok(self.decompose(p, ignore_phase)?.is_some())
    }
}
