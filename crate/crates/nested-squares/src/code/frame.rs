use super::{NestedSquaresCode, Syndrome, N_QUBITS};
use crate::error::{NsqError, Result};
use crate::linalg::CMat;
use crate::pauli::PauliOperator;
use crate::C64;

/// Virtual basis splitting the nine qubits into syndrome (0..6), gauge (6, 7)
/// and logical (8) subsystems.
///
/// Virtual basis state `|b>` is `prod_i d_i^{b_i} |psi0>`, where `psi0` is fixed
/// by every stabilizer, both gauge Z operators and Z-bar, and `d_i` flips only
/// the i-th of those.
#[derive(Debug, Clone)]
pub struct SubsystemFrame {
    fixed: Vec<PauliOperator>,
    flips: Vec<PauliOperator>,
    /// Columns are the virtual basis states in the physical basis.
    v: CMat,
}

/// Which subsystem to trace out first; the result does not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceOrder {
    SyndromeFirst,
    GaugeFirst,
}

/// Solve `symplectic(v, t_k) = want_k` over GF(2) for an 18-bit `(x | z << 9)` vector.
fn solve_partner(constraints: &[(PauliOperator, bool)]) -> Option<(u64, u64)> {
    let n = N_QUBITS;
    let mut rows: Vec<(u32, bool)> = constraints
        .iter()
        .map(|(t, w)| ((t.zmask() as u32) | ((t.xmask() as u32) << n), *w))
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..2 * n {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].0 >> col & 1 == 1) else {
            continue;
        };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && rows[i].0 >> col & 1 == 1 {
                rows[i].0 ^= rows[r].0;
                rows[i].1 ^= rows[r].1;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|(a, b)| *a == 0 && *b) {
        return None;
    }
    let mut v = 0u32;
    for (i, &col) in pivots.iter().enumerate() {
        if rows[i].1 {
            v |= 1 << col;
        }
    }
    let mask = (1u32 << n) - 1;
    Some(((v & mask) as u64, (v >> n) as u64))
}

impl SubsystemFrame {
    pub fn new(code: &NestedSquaresCode) -> Result<Self> {
        let mut fixed: Vec<PauliOperator> = code.stabilizers().to_vec();
        fixed.extend([code.gauge_z(0), code.gauge_z(1), code.z_bar()]);
        let tail = [code.gauge_x(0), code.gauge_x(1), code.x_bar()];

        let mut flips: Vec<PauliOperator> = Vec::with_capacity(9);
        for i in 0..6 {
            let mut cons: Vec<(PauliOperator, bool)> =
                fixed.iter().enumerate().map(|(j, s)| (*s, j == i)).collect();
            cons.extend(tail.iter().map(|t| (*t, false)));
            cons.extend(flips.iter().map(|d| (*d, false)));
            let (x, z) = solve_partner(&cons)
                .ok_or_else(|| NsqError::Other(format!("no partner for stabilizer {i}")))?;
            flips.push(PauliOperator::from_parts(N_QUBITS, 0, x, z)?.hermitian_form());
        }
        flips.extend(tail);

        for (i, d) in flips.iter().enumerate() {
            for (j, s) in fixed.iter().enumerate() {
                if (d.symplectic(s) == 1) != (i == j) {
                    return Err(NsqError::Other(format!("flip {i} and fixed {j} pair badly")));
                }
            }
        }

        let dim = 1usize << N_QUBITS;
        let mut psi0 = vec![C64::new(0.0, 0.0); dim];
        psi0[0] = C64::new(1.0, 0.0);
        for s in &fixed {
            let mut next = psi0.clone();
            for (i, a) in psi0.iter().enumerate() {
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let (j, coef) = s.act(i);
                next[j] += coef * a;
            }
            psi0 = next.into_iter().map(|a| a * 0.5).collect();
        }
        let norm = psi0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-9 {
            return Err(NsqError::Other("fixed operators have no common +1 state".into()));
        }
        psi0.iter_mut().for_each(|a| *a /= norm);

        let mut v = CMat::zeros(dim, dim);
        for b in 0..dim {
            let mut op = PauliOperator::identity(N_QUBITS);
            for (i, d) in flips.iter().enumerate() {
                if b >> i & 1 == 1 {
                    op = op.multiply(d)?;
                }
            }
            for (i, a) in psi0.iter().enumerate() {
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let (j, coef) = op.act(i);
                v[(j, b)] += coef * a;
            }
        }
        Ok(SubsystemFrame { fixed, flips, v })
    }

    /// `[s0..s5, Zg0, Zg1, Z-bar]`.
    pub fn fixed(&self) -> &[PauliOperator] {
        &self.fixed
    }

    /// `[d0..d5, Xg0, Xg1, X-bar]`.
    pub fn flips(&self) -> &[PauliOperator] {
        &self.flips
    }

    /// Physical-to-virtual change of basis, `V^dag`.
    pub fn unitary(&self) -> CMat {
        self.v.adjoint()
    }

    pub fn virtual_basis(&self) -> &CMat {
        &self.v
    }

    /// `V^dag rho V`.
    pub fn to_virtual(&self, rho: &CMat) -> CMat {
        self.v.adjoint() * rho * &self.v
    }

    /// Logical 2x2 block after tracing out syndrome and gauge.
    pub fn extract(&self, rho: &CMat, order: TraceOrder) -> CMat {
        let m = self.to_virtual(rho);
        let keep_after_first: &[usize] = match order {
            TraceOrder::SyndromeFirst => &[6, 7, 8],
            TraceOrder::GaugeFirst => &[0, 1, 2, 3, 4, 5, 8],
        };
        let first = partial_trace(&m, N_QUBITS, keep_after_first);
        let last = keep_after_first.len() - 1;
        partial_trace(&first, keep_after_first.len(), &[last])
    }

    /// Probability of each syndrome as read off the virtual diagonal.
    pub fn syndrome_distribution(&self, rho: &CMat) -> Vec<(Syndrome, f64)> {
        let m = self.to_virtual(rho);
        let mut p = [0.0; 64];
        for b in 0..m.nrows() {
            p[b & 63] += m[(b, b)].re;
        }
        Syndrome::all().map(|s| (s, p[s.bits() as usize])).collect()
    }
}

/// Partial trace of an n-qubit matrix keeping `keep` (little-endian, in order).
pub(crate) fn partial_trace(m: &CMat, n: usize, keep: &[usize]) -> CMat {
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let dk = 1usize << keep.len();
    let dt = 1usize << traced.len();
    let spread = |k: usize, t: usize| -> usize {
        let mut idx = 0;
        for (i, q) in keep.iter().enumerate() {
            idx |= (k >> i & 1) << q;
        }
        for (i, q) in traced.iter().enumerate() {
            idx |= (t >> i & 1) << q;
        }
        idx
    };
    let mut out = CMat::zeros(dk, dk);
    for r in 0..dk {
        for c in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dt {
                acc += m[(spread(r, t), spread(c, t))];
            }
            out[(r, c)] = acc;
        }
    }
    out
}
