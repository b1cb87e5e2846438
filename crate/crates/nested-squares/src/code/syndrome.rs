use serde::{Deserialize, Serialize};
use std::fmt;

/// Six stabilizer outcomes; bit i set means s_i measured -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Syndrome(u8);

impl Syndrome {
    pub const ZERO: Syndrome = Syndrome(0);

    pub fn new(bits: u8) -> Self {
        assert!(bits < 64, "syndrome has six bits");
        Syndrome(bits)
    }

    pub fn all() -> impl Iterator<Item = Syndrome> {
        (0..64u8).map(Syndrome)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn bit(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn xor(self, other: Syndrome) -> Syndrome {
        Syndrome(self.0 ^ other.0)
    }

    /// `(m5, m4)`, the X-type stabilizer bits.
    pub fn z_part(self) -> (bool, bool) {
        (self.bit(5), self.bit(4))
    }

    /// Key under which the recovery table lists this syndrome.
    ///
    /// The Z-error half (m5, m4) is listed as measured. The X-error half is listed
    /// under labels that are a linear recoding of (m3, m2, m1, m0): the table's
    /// P0 column uses t1t0 and its P4 column t3t2, with codes 01 = c, 10 = x, 11 = y.
    /// Measured bits relate by t0 = m2, t1 = m0 ^ m2, t2 = m3, t3 = m1 ^ m3.
    pub fn table_label(self) -> u8 {
        let m = |i: u8| self.0 >> i & 1;
        let t0 = m(2);
        let t1 = m(0) ^ m(2);
        let t2 = m(3);
        let t3 = m(1) ^ m(3);
        (m(5) << 5) | (m(4) << 4) | (t3 << 3) | (t2 << 2) | (t1 << 1) | t0
    }

    /// Inverse of `table_label`.
    pub fn from_table_label(label: u8) -> Syndrome {
        assert!(label < 64);
        let t = |i: u8| label >> i & 1;
        let m2 = t(0);
        let m0 = t(1) ^ t(0);
        let m3 = t(2);
        let m1 = t(3) ^ t(2);
        Syndrome((label & 0b110000) | (m3 << 3) | (m2 << 2) | (m1 << 1) | m0)
    }

    /// Six-character string `m5 m4 m3 m2 m1 m0`.
    pub fn to_bit_string(self) -> String {
        format!("{:06b}", self.0)
    }

    pub fn parse(s: &str) -> Option<Syndrome> {
        if s.len() != 6 {
            return None;
        }
        u8::from_str_radix(s, 2).ok().map(Syndrome)
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:06b}", self.0)
    }
}
