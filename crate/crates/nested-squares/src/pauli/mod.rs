//! Pauli strings as phase plus X/Z bitmasks.
//!
//! An operator is `i^phase * prod_k X_k^{x_k} Z_k^{z_k}`, so a Y on qubit k is
//! both bits set together with one extra factor of i (Y = iXZ).

mod group;
mod text;

pub use group::{Decomposition, PauliGroup};
pub use text::{format_pauli, parse_pauli};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{NsqError, Result};
use crate::C64;

/// Widths above this are refused by `dense_matrix`.
pub const DENSE_PAULI_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliOperator {
    width: usize,
    phase: u8,
    x: u64,
    z: u64,
}

/// Single-qubit letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

fn mask(width: usize) -> u64 {
    if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// `i^k` as a complex number.
pub fn i_pow(k: u8) -> C64 {
    match k & 3 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

impl PauliOperator {
    pub fn identity(width: usize) -> Self {
        assert!(width <= 64, "Pauli width limited to 64");
        PauliOperator {
            width,
            phase: 0,
            x: 0,
            z: 0,
        }
    }

    /// Raw constructor; `phase` is the exponent of i in front of `X^x Z^z`.
    pub fn from_parts(width: usize, phase: u8, x: u64, z: u64) -> Result<Self> {
        if width > 64 {
            return Err(NsqError::WidthLimit { width, limit: 64 });
        }
        if (x | z) & !mask(width) != 0 {
            return Err(NsqError::OutOfRange(64 - (x | z).leading_zeros() as usize - 1));
        }
        Ok(PauliOperator {
            width,
            phase: phase & 3,
            x,
            z,
        })
    }

    /// Hermitian operator with the given letters and sign `+1` (`negative = false`).
    pub fn from_letters(width: usize, letters: &[(usize, Letter)], negative: bool) -> Result<Self> {
        let mut p = PauliOperator::identity(width);
        for &(q, l) in letters {
            if q >= width {
                return Err(NsqError::OutOfRange(q));
            }
            let f = PauliOperator::single(width, q, l);
            p = p.multiply(&f)?;
        }
        if negative {
            p.phase = (p.phase + 2) & 3;
        }
        Ok(p)
    }

    /// One letter on qubit `q`, Hermitian.
    pub fn single(width: usize, q: usize, l: Letter) -> Self {
        assert!(q < width && width <= 64);
        let (bx, bz) = l.bits();
        PauliOperator {
            width,
            phase: if l == Letter::Y { 1 } else { 0 },
            x: (bx as u64) << q,
            z: (bz as u64) << q,
        }
    }

    pub fn x_type(width: usize, qubits: &[usize]) -> Self {
        let mut p = PauliOperator::identity(width);
        for &q in qubits {
            assert!(q < width);
            p.x ^= 1 << q;
        }
        p
    }

    pub fn z_type(width: usize, qubits: &[usize]) -> Self {
        let mut p = PauliOperator::identity(width);
        for &q in qubits {
            assert!(q < width);
            p.z ^= 1 << q;
        }
        p
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn xmask(&self) -> u64 {
        self.x
    }

    pub fn zmask(&self) -> u64 {
        self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Coefficient in front of the tensor product of letters (with Y the Hermitian Y).
    pub fn letter_phase(&self) -> u8 {
        (self.phase + 4 - (self.y_count() % 4) as u8) & 3
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    /// Multiply by `i^k`.
    pub fn times_i(mut self, k: u8) -> Self {
        self.phase = (self.phase + k) & 3;
        self
    }

    /// Same letters, coefficient +1.
    pub fn hermitian_form(&self) -> Self {
        PauliOperator {
            phase: (self.y_count() % 4) as u8,
            ..*self
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.letter_phase().is_multiple_of(2)
    }

    fn check_width(&self, other: &Self) -> Result<()> {
        if self.width != other.width {
            Err(NsqError::WidthMismatch(self.width, other.width))
        } else {
            Ok(())
        }
    }

    /// Operator product `self * other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_width(other)?;
        // X^a Z^b X^c Z^d = (-1)^{|b & c|} X^{a^c} Z^{b^d}
        let swap = ((self.z & other.x).count_ones() % 2) as u8;
        Ok(PauliOperator {
            width: self.width,
            phase: (self.phase + other.phase + 2 * swap) & 3,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        })
    }

    pub fn adjoint(&self) -> Self {
        // (i^k X^x Z^z)^dag = i^{-k} Z^z X^x = i^{-k} (-1)^{|x&z|} X^x Z^z
        let sign = ((self.x & self.z).count_ones() % 2) as u8;
        PauliOperator {
            phase: (4 - self.phase + 2 * sign) & 3,
            ..*self
        }
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_width(other)?;
        Ok(self.symplectic(other) == 0)
    }

    /// Symplectic form; 0 for commuting, 1 for anticommuting. Widths must match.
    pub fn symplectic(&self, other: &Self) -> u32 {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2
    }

    /// Equality ignoring the phase.
    pub fn same_letters(&self, other: &Self) -> bool {
        self.width == other.width && self.x == other.x && self.z == other.z
    }

    /// Restrict to `targets` (qubit j of the result is `targets[j]`). Phase kept.
    pub fn restrict(&self, targets: &[usize]) -> Self {
        let mut x = 0;
        let mut z = 0;
        for (j, &q) in targets.iter().enumerate() {
            x |= (self.x >> q & 1) << j;
            z |= (self.z >> q & 1) << j;
        }
        PauliOperator {
            width: targets.len(),
            phase: self.phase,
            x,
            z,
        }
    }

    /// Drop the factors on `targets` and the phase.
    pub fn restrict_complement(&self, targets: &[usize]) -> Self {
        let mask: u64 = targets.iter().map(|q| 1u64 << q).sum();
        PauliOperator {
            width: self.width,
            phase: 0,
            x: self.x & !mask,
            z: self.z & !mask,
        }
    }

    /// Place this operator onto `targets` of a wider register.
    pub fn embed(&self, width: usize, targets: &[usize]) -> Result<Self> {
        if targets.len() != self.width {
            return Err(NsqError::WidthMismatch(targets.len(), self.width));
        }
        let mut x = 0;
        let mut z = 0;
        for (j, &q) in targets.iter().enumerate() {
            if q >= width {
                return Err(NsqError::OutOfRange(q));
            }
            x |= (self.x >> j & 1) << q;
            z |= (self.z >> j & 1) << q;
        }
        PauliOperator::from_parts(width, self.phase, x, z)
    }

    /// Action on a basis state: returns `(j, c)` with `P|i> = c|j>`.
    #[inline]
    pub fn act(&self, i: usize) -> (usize, C64) {
        let sign = ((i as u64 & self.z).count_ones() % 2) as u8;
        (i ^ self.x as usize, i_pow(self.phase + 2 * sign))
    }

    pub fn dense_matrix(&self) -> Result<DMatrix<C64>> {
        if self.width > DENSE_PAULI_LIMIT {
            return Err(NsqError::WidthLimit {
                width: self.width,
                limit: DENSE_PAULI_LIMIT,
            });
        }
        let d = 1usize << self.width;
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            let (j, c) = self.act(i);
            m[(j, i)] = c;
        }
        Ok(m)
    }
}
