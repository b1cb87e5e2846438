//! Text form: `+Zc.Zx.Iy@P0 * Zc.Zx.Iy@P2`. The leading sign is one of `+`, `-`,
//! `+i`, `-i` and multiplies the tensor product of Hermitian letters.

use super::{Letter, PauliOperator};
use crate::error::{NsqError, Result};
use crate::layout::{RegisterLayout, Slot};

pub fn format_pauli(p: &PauliOperator, layout: &RegisterLayout) -> Result<String> {
    if p.width() != layout.n_qubits() {
        return Err(NsqError::WidthMismatch(p.width(), layout.n_qubits()));
    }
    let sign = match p.letter_phase() {
        0 => "+",
        1 => "+i",
        2 => "-",
        _ => "-i",
    };
    let mut factors = Vec::new();
    for (k, part) in layout.particles().iter().enumerate() {
        let letters: Vec<Letter> = (0..3).map(|s| p.letter(3 * k + s)).collect();
        if letters.iter().all(|l| *l == Letter::I) {
            continue;
        }
        let body: Vec<String> = letters
            .iter()
            .zip(Slot::ALL)
            .map(|(l, s)| format!("{}{}", l.as_char(), s.suffix()))
            .collect();
        factors.push(format!("{}@{}", body.join("."), part.id));
    }
    if factors.is_empty() {
        return Ok(format!("{sign}I"));
    }
    Ok(format!("{sign}{}", factors.join(" * ")))
}

pub fn parse_pauli(text: &str, layout: &RegisterLayout) -> Result<PauliOperator> {
    let width = layout.n_qubits();
    let t = text.trim();
    let (phase, rest) = if let Some(r) = t.strip_prefix("+i") {
        (1u8, r)
    } else if let Some(r) = t.strip_prefix("-i") {
        (3, r)
    } else if let Some(r) = t.strip_prefix('+') {
        (0, r)
    } else if let Some(r) = t.strip_prefix('-') {
        (2, r)
    } else {
        (0, t)
    };
    let rest = rest.trim();
    let mut p = PauliOperator::identity(width);
    if rest == "I" {
        return Ok(p.times_i(phase));
    }
    let mut seen = Vec::new();
    for factor in rest.split('*') {
        let factor = factor.trim();
        let (body, id) = factor
            .split_once('@')
            .ok_or_else(|| NsqError::Parse(format!("missing '@' in {factor:?}")))?;
        let id = id.trim();
        if seen.contains(&id) {
            return Err(NsqError::Parse(format!("particle {id} repeated")));
        }
        seen.push(id);
        let base = 3 * layout.position(id)?;
        let mut slots_seen = [false; 3];
        for tok in body.split('.') {
            let mut ch = tok.trim().chars();
            let (l, s) = match (ch.next(), ch.next(), ch.next()) {
                (Some(l), Some(s), None) => (l, s),
                _ => return Err(NsqError::Parse(format!("bad token {tok:?}"))),
            };
            let l = Letter::from_char(l).ok_or_else(|| NsqError::Parse(format!("bad letter in {tok:?}")))?;
            let s = Slot::from_suffix(s).ok_or_else(|| NsqError::Parse(format!("bad slot in {tok:?}")))?;
            if slots_seen[s.index()] {
                return Err(NsqError::Parse(format!("slot repeated in {factor:?}")));
            }
            slots_seen[s.index()] = true;
            p = p.multiply(&PauliOperator::single(width, base + s.index(), l))?;
        }
    }
    Ok(p.times_i(phase))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_s0() {
        let l = RegisterLayout::physical();
        let s = "+Zc.Zx.Iy@P0 * Zc.Zx.Iy@P2";
        let p = parse_pauli(s, &l).unwrap();
        assert_eq!(format_pauli(&p, &l).unwrap(), s);
        assert_eq!(p.weight(), 4);
    }

    #[test]
    fn signs_and_y() {
        let l = RegisterLayout::physical();
        for s in ["-Yc.Ix.Iy@P4", "+iXc.Zx.Yy@P0", "-iIc.Ix.Zy@P2", "+I", "-I"] {
            let p = parse_pauli(s, &l).unwrap();
            assert_eq!(format_pauli(&p, &l).unwrap(), s);
        }
        assert!(parse_pauli("+Yc.Ix.Iy@P4", &l).unwrap().is_hermitian());
    }

    #[test]
    fn rejects_garbage() {
        let l = RegisterLayout::physical();
        assert!(parse_pauli("+Qc@P0", &l).is_err());
        assert!(parse_pauli("+Zc@P9", &l).is_err());
        assert!(parse_pauli("+Zc.Zc@P0", &l).is_err());
    }
}
