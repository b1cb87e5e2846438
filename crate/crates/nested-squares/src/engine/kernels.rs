//! In-place kernels on flat amplitude buffers of `2^n` entries.
//!
//! A k-qubit operator touches disjoint groups of `2^k` amplitudes. Groups are
//! enumerated by inserting zero bits at the target positions; big buffers are
//! split across threads by group index, which never aliases.

use crate::linalg::CMat;
use crate::pauli::PauliOperator;
use crate::C64;

#[cfg_attr(not(feature = "parallel"), allow(dead_code))]
const PAR_MIN: usize = 1 << 12;
#[cfg_attr(not(feature = "parallel"), allow(dead_code))]
const BLOCK: usize = 1 << 10;

#[derive(Clone, Copy)]
struct SendPtr(*mut C64);
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

impl SendPtr {
    #[inline]
    fn get(self) -> *mut C64 {
        self.0
    }
}

#[inline]
fn insert_zeros(mut r: usize, sorted: &[usize]) -> usize {
    for &t in sorted {
        let low = r & ((1 << t) - 1);
        r = ((r >> t) << (t + 1)) | low;
    }
    r
}

fn offsets(targets: &[usize]) -> Vec<usize> {
    let k = targets.len();
    (0..1usize << k)
        .map(|j| {
            (0..k)
                .filter(|b| j >> b & 1 == 1)
                .map(|b| 1usize << targets[b])
                .sum()
        })
        .collect()
}

/// Run `body(lo, hi)` over ranges of group indices, possibly in parallel. Group
/// `r` has base `insert_zeros(r, sorted)`; `body` must only touch its own groups.
fn for_each_group<F>(n: usize, targets: &[usize], body: F)
where
    F: Fn(usize, usize) + Sync + Send,
{
    let groups = 1usize << (n - targets.len());
    #[cfg(feature = "parallel")]
    {
        if (1usize << n) >= PAR_MIN && groups >= 2 * BLOCK {
            use rayon::prelude::*;
            let blocks = groups.div_ceil(BLOCK);
            (0..blocks)
                .into_par_iter()
                .for_each(|b| body(b * BLOCK, ((b + 1) * BLOCK).min(groups)));
            return;
        }
    }
    body(0, groups);
}

fn sorted(targets: &[usize]) -> Vec<usize> {
    let mut s = targets.to_vec();
    s.sort_unstable();
    s
}

/// `amps <- M amps` with `M` acting on `targets` (target j is bit j of the row index of M).
pub fn apply_dense(amps: &mut [C64], n: usize, targets: &[usize], m: &CMat) {
    let k = targets.len();
    let dim = 1usize << k;
    debug_assert_eq!(m.nrows(), dim);
    debug_assert_eq!(amps.len(), 1 << n);
    let ptr = SendPtr(amps.as_mut_ptr());
    let st = sorted(targets);
    if k == 1 {
        let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let bit = 1usize << targets[0];
        for_each_group(n, targets, |lo, hi| {
            let p = ptr.get();
            for r in lo..hi {
                let i = insert_zeros(r, &st);
                // SAFETY: i and i | bit belong to group r only.
                unsafe {
                    let a = *p.add(i);
                    let b = *p.add(i | bit);
                    *p.add(i) = m00 * a + m01 * b;
                    *p.add(i | bit) = m10 * a + m11 * b;
                }
            }
        });
        return;
    }
    let off = offsets(targets);
    let flat: Vec<C64> = (0..dim * dim).map(|i| m[(i / dim, i % dim)]).collect();
    for_each_group(n, targets, |lo, hi| {
        let p = ptr.get();
        let mut v = vec![C64::new(0.0, 0.0); dim];
        let mut w = vec![C64::new(0.0, 0.0); dim];
        for r in lo..hi {
            let base = insert_zeros(r, &st);
            for j in 0..dim {
                // SAFETY: base + off[j] is in range and owned by this group only.
                v[j] = unsafe { *p.add(base + off[j]) };
            }
            for (i, wi) in w.iter_mut().enumerate() {
                let row = &flat[i * dim..(i + 1) * dim];
                *wi = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            }
            for j in 0..dim {
                unsafe { *p.add(base + off[j]) = w[j] };
            }
        }
    });
}

/// Generalized permutation: column j maps to row `perm[j]` with factor `phase[j]`.
pub fn apply_monomial(amps: &mut [C64], n: usize, targets: &[usize], perm: &[usize], phase: &[C64]) {
    let dim = perm.len();
    if dim == 2 {
        let mut m = CMat::zeros(2, 2);
        m[(perm[0], 0)] = phase[0];
        m[(perm[1], 1)] = phase[1];
        return apply_dense(amps, n, targets, &m);
    }
    let off = offsets(targets);
    let st = sorted(targets);
    // only the columns that move or pick up a phase need touching
    let moves: Vec<(usize, usize, C64, bool)> = (0..dim)
        .filter(|&j| perm[j] != j || phase[j] != C64::new(1.0, 0.0))
        .map(|j| (off[j], off[perm[j]], phase[j], phase[j] == C64::new(1.0, 0.0)))
        .collect();
    let ptr = SendPtr(amps.as_mut_ptr());
    for_each_group(n, targets, |lo, hi| {
        let p = ptr.get();
        let mut v = [C64::new(0.0, 0.0); 64];
        let mut big = Vec::new();
        let buf: &mut [C64] = if moves.len() <= 64 {
            &mut v[..]
        } else {
            big.resize(moves.len(), C64::new(0.0, 0.0));
            &mut big[..]
        };
        for r in lo..hi {
            let base = insert_zeros(r, &st);
            // SAFETY: every offset stays inside group r.
            unsafe {
                for (k, &(src, _, _, _)) in moves.iter().enumerate() {
                    *buf.get_unchecked_mut(k) = *p.add(base + src);
                }
                for (k, &(_, dst, ph, one)) in moves.iter().enumerate() {
                    let a = *buf.get_unchecked(k);
                    *p.add(base + dst) = if one { a } else { ph * a };
                }
            }
        }
    });
}

/// Diagonal operator on `targets`.
pub fn apply_diagonal(amps: &mut [C64], targets: &[usize], diag: &[C64]) {
    let extract = |i: usize| -> usize {
        targets
            .iter()
            .enumerate()
            .map(|(b, &t)| (i >> t & 1) << b)
            .sum()
    };
    let ptr = SendPtr(amps.as_mut_ptr());
    let body = |lo: usize, hi: usize| {
        let p = ptr.get();
        for i in lo..hi {
            unsafe { *p.add(i) *= diag[extract(i)] };
        }
    };
    run_blocks(amps.len(), body);
}

/// Pauli string over the full buffer (`p.width() == n`). `conj` applies the
/// complex conjugate operator instead.
pub fn apply_pauli(amps: &mut [C64], p: &PauliOperator, conj: bool) {
    let x = p.xmask() as usize;
    let z = p.zmask() as usize;
    let base_phase = if conj { (4 - p.phase()) & 3 } else { p.phase() };
    let c = crate::pauli::i_pow(base_phase);
    let trivial = base_phase == 0;
    let ph = |i: usize, a: C64| -> C64 {
        let a = if (i & z).count_ones() & 1 == 1 { -a } else { a };
        if trivial {
            a
        } else {
            c * a
        }
    };
    let len = amps.len();
    let ptr = SendPtr(amps.as_mut_ptr());
    if x == 0 {
        let body = |lo: usize, hi: usize| {
            let pp = ptr.get();
            for i in lo..hi {
                unsafe { *pp.add(i) = ph(i, *pp.add(i)) };
            }
        };
        run_blocks(len, body);
        return;
    }
    let hb = 1usize << (usize::BITS - 1 - x.leading_zeros());
    let half = len / 2;
    let body = |lo: usize, hi: usize| {
        let pp = ptr.get();
        for r in lo..hi {
            // r enumerates indices with bit hb cleared
            let i = ((r & !(hb - 1)) << 1) | (r & (hb - 1));
            let j = i ^ x;
            unsafe {
                let ai = *pp.add(i);
                let aj = *pp.add(j);
                *pp.add(j) = ph(i, ai);
                *pp.add(i) = ph(j, aj);
            }
        }
    };
    run_blocks(half, body);
}

fn run_blocks<F: Fn(usize, usize) + Sync + Send>(len: usize, body: F) {
    #[cfg(feature = "parallel")]
    {
        if len >= PAR_MIN {
            use rayon::prelude::*;
            (0..len.div_ceil(BLOCK))
                .into_par_iter()
                .for_each(|b| body(b * BLOCK, ((b + 1) * BLOCK).min(len)));
            return;
        }
    }
    body(0, len);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, mat_h, mat_x};

    #[test]
    fn x_on_qubit_one() {
        let mut a = vec![c(0., 0.); 4];
        a[0] = c(1., 0.);
        apply_dense(&mut a, 2, &[1], &mat_x());
        assert_eq!(a[2], c(1., 0.));
    }

    #[test]
    fn h_twice_identity() {
        let mut a: Vec<C64> = (0..8).map(|i| c(i as f64, -(i as f64))).collect();
        let orig = a.clone();
        apply_dense(&mut a, 3, &[2], &mat_h());
        apply_dense(&mut a, 3, &[2], &mat_h());
        for (x, y) in a.iter().zip(&orig) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn target_order_matters() {
        // CNOT with control = target[0]
        let mut m = CMat::zeros(4, 4);
        for (col, row) in [(0, 0), (1, 3), (2, 2), (3, 1)] {
            m[(row, col)] = c(1., 0.);
        }
        let mut a = vec![c(0., 0.); 8];
        a[0b100] = c(1., 0.); // qubit 2 set
        apply_dense(&mut a, 3, &[2, 0], &m);
        assert_eq!(a[0b101], c(1., 0.));
    }
}
