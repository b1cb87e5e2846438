use serde::{Deserialize, Serialize};

use super::gate::GateOp;
use super::kernels;
use crate::error::{NsqError, Result};
use crate::layout::RegisterLayout;
use crate::linalg::CMat;
use crate::pauli::PauliOperator;
use crate::C64;

pub const MAX_STATE_QUBITS: usize = 24;

#[derive(Debug, Clone)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<C64>,
}

impl StateVector {
    /// Computational basis state `|index>`.
    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        let n = layout.n_qubits();
        if n > MAX_STATE_QUBITS {
            return Err(NsqError::WidthLimit {
                width: n,
                limit: MAX_STATE_QUBITS,
            });
        }
        if index >= 1 << n {
            return Err(NsqError::OutOfRange(index));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { layout, amps })
    }

    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<C64>) -> Result<Self> {
        let s = Self::from_amplitudes_unnormalized(layout, amps)?;
        let nrm = s.norm_sqr();
        if (nrm - 1.0).abs() > 1e-10 {
            return Err(NsqError::InvalidState(format!("norm^2 = {nrm}")));
        }
        Ok(s)
    }

    /// No norm check; used for branch bookkeeping.
    pub fn from_amplitudes_unnormalized(layout: RegisterLayout, amps: Vec<C64>) -> Result<Self> {
        let n = layout.n_qubits();
        if n > MAX_STATE_QUBITS {
            return Err(NsqError::WidthLimit {
                width: n,
                limit: MAX_STATE_QUBITS,
            });
        }
        if amps.len() != 1 << n {
            return Err(NsqError::InvalidState(format!(
                "{} amplitudes for {} qubits",
                amps.len(),
                n
            )));
        }
        Ok(StateVector { layout, amps })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn n_qubits(&self) -> usize {
        self.layout.n_qubits()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        let a = &self.amps;
        crate::par::sum_range(a.len(), |i| a[i].norm_sqr())
    }

    /// Rescale to unit norm; returns the old squared norm.
    pub fn normalize(&mut self) -> f64 {
        let n2 = self.norm_sqr();
        if n2 > 0.0 {
            let s = 1.0 / n2.sqrt();
            self.amps.iter_mut().for_each(|z| *z *= s);
        }
        n2
    }

    fn check_gate(&self, g: &GateOp) -> Result<()> {
        if g.max_target() >= self.n_qubits() {
            return Err(NsqError::OutOfRange(g.max_target()));
        }
        Ok(())
    }

    pub fn apply(&mut self, g: &GateOp) -> Result<()> {
        self.check_gate(g)?;
        let n = self.n_qubits();
        g.apply_buffer(&mut self.amps, n, 0, false);
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        if p.width() != self.n_qubits() {
            return Err(NsqError::WidthMismatch(p.width(), self.n_qubits()));
        }
        kernels::apply_pauli(&mut self.amps, p, false);
        Ok(())
    }

    /// Any matrix (not necessarily unitary) on `targets`.
    pub fn apply_matrix(&mut self, targets: &[usize], m: &CMat) -> Result<()> {
        if let Some(&q) = targets.iter().find(|&&q| q >= self.n_qubits()) {
            return Err(NsqError::OutOfRange(q));
        }
        let n = self.n_qubits();
        kernels::apply_dense(&mut self.amps, n, targets, m);
        Ok(())
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.amps.len() != other.amps.len() {
            return Err(NsqError::WidthMismatch(self.n_qubits(), other.n_qubits()));
        }
        let (a, b) = (&self.amps, &other.amps);
        Ok(crate::par::csum_range(a.len(), |i| a[i].conj() * b[i]))
    }

    /// `<psi|P|psi>` as a complex number.
    pub fn expectation_complex(&self, p: &PauliOperator) -> Result<C64> {
        if p.width() != self.n_qubits() {
            return Err(NsqError::WidthMismatch(p.width(), self.n_qubits()));
        }
        let a = &self.amps;
        Ok(crate::par::csum_range(a.len(), |i| {
            let (j, c) = p.act(i);
            a[j].conj() * c * a[i]
        }))
    }

    /// Real part of `<psi|P|psi>`; the imaginary part vanishes for Hermitian `P`.
    pub fn expectation(&self, p: &PauliOperator) -> Result<f64> {
        Ok(self.expectation_complex(p)?.re)
    }

    /// Tensor product; `self` takes the low qubits.
    pub fn tensor(&self, high: &StateVector) -> Result<StateVector> {
        let layout = self.layout.concat(&high.layout)?;
        let lo = self.amps.len();
        let mut amps = vec![C64::new(0.0, 0.0); lo * high.amps.len()];
        for (h, &b) in high.amps.iter().enumerate() {
            if b == C64::new(0.0, 0.0) {
                continue;
            }
            for (l, &a) in self.amps.iter().enumerate() {
                amps[h * lo + l] = a * b;
            }
        }
        StateVector::from_amplitudes_unnormalized(layout, amps)
    }

    /// Reduced density matrix on `keep` (qubit j of the result is `keep[j]`).
    pub fn reduced_qubits(&self, keep: &[usize]) -> Result<CMat> {
        reduce_pure(&self.amps, self.n_qubits(), keep)
    }

    /// Reduced state on whole particles, as a density matrix over their sub-layout.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let (layout, qubits) = sub_layout(&self.layout, keep)?;
        let m = self.reduced_qubits(&qubits)?;
        DensityMatrix::from_matrix(layout, &m)
    }

    /// Projection onto `|index>` components of a qubit subset, without renormalizing.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_pure(self)
    }

    pub fn dump(&self) -> StateDump {
        StateDump {
            layout: self.layout.particles().iter().map(|p| p.id.clone()).collect(),
            n_qubits: self.n_qubits(),
            amplitudes: self
                .amps
                .iter()
                .enumerate()
                .filter(|(_, z)| z.norm() > 1e-15)
                .map(|(i, z)| (i, z.re, z.im))
                .collect(),
        }
    }

    /// Place this state into a larger layout; particles not present here start in `|0,00>`.
    pub fn embed(&self, layout: RegisterLayout) -> Result<StateVector> {
        let map = qubit_map(&self.layout, &layout)?;
        let n = layout.n_qubits();
        if n > MAX_STATE_QUBITS {
            return Err(NsqError::WidthLimit { width: n, limit: MAX_STATE_QUBITS });
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        for (i, a) in self.amps.iter().enumerate() {
            amps[spread(i, &map)] = *a;
        }
        StateVector::from_amplitudes_unnormalized(layout, amps)
    }

    /// Component with every particle outside `layout` in `|0,00>`, over `layout`.
    /// Not renormalized.
    pub fn restrict(&self, layout: RegisterLayout) -> Result<StateVector> {
        let map = qubit_map(&layout, &self.layout)?;
        let amps = (0..1usize << layout.n_qubits()).map(|i| self.amps[spread(i, &map)]).collect();
        StateVector::from_amplitudes_unnormalized(layout, amps)
    }

    /// Probability that the listed particles are all in `|0,00>`.
    pub fn prob_reset(&self, ids: &[&str]) -> Result<f64> {
        let mut mask = 0usize;
        for id in ids {
            let k = self.layout.position(id)?;
            mask |= 0b111 << (3 * k);
        }
        Ok(crate::par::sum_range(self.amps.len(), |i| {
            if i & mask == 0 {
                self.amps[i].norm_sqr()
            } else {
                0.0
            }
        }))
    }

}

/// JSON snapshot: layout header then `(basis index, re, im)` triples.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateDump {
    pub layout: Vec<String>,
    pub n_qubits: usize,
    pub amplitudes: Vec<(usize, f64, f64)>,
}

/// For each qubit of `small`, its index in `big`.
fn qubit_map(small: &RegisterLayout, big: &RegisterLayout) -> Result<Vec<usize>> {
    let mut map = Vec::with_capacity(small.n_qubits());
    for p in small.particles() {
        let k = big.position(&p.id)?;
        map.extend([3 * k, 3 * k + 1, 3 * k + 2]);
    }
    Ok(map)
}

fn spread(i: usize, map: &[usize]) -> usize {
    map.iter().enumerate().map(|(b, &q)| (i >> b & 1) << q).sum()
}

fn sub_layout(layout: &RegisterLayout, keep: &[&str]) -> Result<(RegisterLayout, Vec<usize>)> {
    if keep.is_empty() {
        return Err(NsqError::Other("partial trace needs a non-empty keep set".into()));
    }
    let mut parts = Vec::new();
    let mut qubits = Vec::new();
    for id in keep {
        let k = layout.position(id)?;
        parts.push(layout.particles()[k].clone());
        qubits.extend([3 * k, 3 * k + 1, 3 * k + 2]);
    }
    Ok((RegisterLayout::new(parts)?, qubits))
}

fn check_keep(n: usize, keep: &[usize]) -> Result<()> {
    if keep.is_empty() {
        return Err(NsqError::Other("partial trace needs a non-empty keep set".into()));
    }
    for (i, &q) in keep.iter().enumerate() {
        if q >= n {
            return Err(NsqError::OutOfRange(q));
        }
        if keep[..i].contains(&q) {
            return Err(NsqError::Other(format!("qubit {q} kept twice")));
        }
    }
    if keep.len() > 12 {
        return Err(NsqError::WidthLimit {
            width: keep.len(),
            limit: 12,
        });
    }
    Ok(())
}

fn reduce_pure(amps: &[C64], n: usize, keep: &[usize]) -> Result<CMat> {
    check_keep(n, keep)?;
    let k = keep.len();
    let d = 1usize << k;
    let kmask: usize = keep.iter().map(|q| 1usize << q).sum();
    let spread = |j: usize| -> usize { (0..k).map(|b| (j >> b & 1) << keep[b]).sum() };
    let rest_bits: Vec<usize> = (0..n).filter(|q| kmask >> q & 1 == 0).collect();
    let n_rest = 1usize << rest_bits.len();
    let spread_rest = |r: usize| -> usize {
        rest_bits
            .iter()
            .enumerate()
            .map(|(b, &q)| (r >> b & 1) << q)
            .sum()
    };
    let keep_idx: Vec<usize> = (0..d).map(spread).collect();
    let rows = crate::par::map_range(d * d, |ab| {
        let (a, b) = (ab / d, ab % d);
        if b < a {
            return C64::new(0.0, 0.0);
        }
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..n_rest {
            let base = spread_rest(r);
            acc += amps[base | keep_idx[a]] * amps[base | keep_idx[b]].conj();
        }
        acc
    });
    let mut m = CMat::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            m[(a, b)] = rows[a * d + b];
            m[(b, a)] = rows[a * d + b].conj();
        }
    }
    Ok(m)
}

pub const MAX_DENSITY_QUBITS: usize = 12;

/// Density matrix stored as a `2n`-qubit buffer: row bits above column bits.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    layout: RegisterLayout,
    data: Vec<C64>,
}

impl DensityMatrix {
    fn check_width(layout: &RegisterLayout) -> Result<usize> {
        let n = layout.n_qubits();
        if n > MAX_DENSITY_QUBITS {
            return Err(NsqError::WidthLimit {
                width: n,
                limit: MAX_DENSITY_QUBITS,
            });
        }
        Ok(n)
    }

    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let n = Self::check_width(psi.layout())?;
        let a = psi.amplitudes();
        let d = 1usize << n;
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            if a[r] == C64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..d {
                data[(r << n) | c] = a[r] * a[c].conj();
            }
        }
        Ok(DensityMatrix {
            layout: psi.layout().clone(),
            data,
        })
    }

    pub fn from_matrix(layout: RegisterLayout, m: &CMat) -> Result<Self> {
        let n = Self::check_width(&layout)?;
        let d = 1usize << n;
        if m.nrows() != d || m.ncols() != d {
            return Err(NsqError::InvalidState(format!("matrix {}x{} for {} qubits", m.nrows(), m.ncols(), n)));
        }
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                data[(r << n) | c] = m[(r, c)];
            }
        }
        Ok(DensityMatrix { layout, data })
    }

    pub fn maximally_mixed(layout: RegisterLayout) -> Result<Self> {
        let n = Self::check_width(&layout)?;
        let d = 1usize << n;
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            data[(r << n) | r] = C64::new(1.0 / d as f64, 0.0);
        }
        Ok(DensityMatrix { layout, data })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn n_qubits(&self) -> usize {
        self.layout.n_qubits()
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[(r << self.n_qubits()) | c]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn to_matrix(&self) -> CMat {
        let d = self.dim();
        CMat::from_fn(d, d, |r, c| self.get(r, c))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|r| self.get(r, r)).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim();
        let mut m: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                m = m.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        m
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|z| *z *= s);
    }

    pub fn scale_complex(&mut self, s: C64) {
        self.data.iter_mut().for_each(|z| *z *= s);
    }

    /// `self += other`.
    pub fn add_assign(&mut self, other: &DensityMatrix) -> Result<()> {
        if self.data.len() != other.data.len() {
            return Err(NsqError::WidthMismatch(self.n_qubits(), other.n_qubits()));
        }
        crate::par::for_chunks2(&mut self.data, &other.data, 1 << 12, |a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y)
        });
        Ok(())
    }

    fn check_gate(&self, g: &GateOp) -> Result<()> {
        if g.max_target() >= self.n_qubits() {
            return Err(NsqError::OutOfRange(g.max_target()));
        }
        Ok(())
    }

    /// `rho <- U rho U^dag`.
    pub fn apply(&mut self, g: &GateOp) -> Result<()> {
        self.check_gate(g)?;
        let n = self.n_qubits();
        g.apply_buffer(&mut self.data, 2 * n, n, false);
        g.apply_buffer(&mut self.data, 2 * n, 0, true);
        Ok(())
    }

    /// `rho <- A rho B^dag` for matrices on `targets`.
    pub fn sandwich(&mut self, targets: &[usize], a: &CMat, b: &CMat) -> Result<()> {
        let n = self.n_qubits();
        if let Some(&q) = targets.iter().find(|&&q| q >= n) {
            return Err(NsqError::OutOfRange(q));
        }
        let rows: Vec<usize> = targets.iter().map(|q| q + n).collect();
        kernels::apply_dense(&mut self.data, 2 * n, &rows, a);
        kernels::apply_dense(&mut self.data, 2 * n, targets, &b.map(|z| z.conj()));
        Ok(())
    }

    /// `rho <- P rho Q^dag` for register-wide Pauli strings.
    pub fn pauli_sandwich(&mut self, p: &PauliOperator, q: &PauliOperator) -> Result<()> {
        let n = self.n_qubits();
        if p.width() != n || q.width() != n {
            return Err(NsqError::WidthMismatch(p.width(), n));
        }
        let all: Vec<usize> = (0..n).collect();
        let rows: Vec<usize> = (n..2 * n).collect();
        let p2 = p.embed(2 * n, &rows)?;
        let q2 = q.embed(2 * n, &all)?;
        kernels::apply_pauli(&mut self.data, &p2, false);
        kernels::apply_pauli(&mut self.data, &q2, true);
        Ok(())
    }

    /// `rho <- P rho P^dag`.
    pub fn conjugate_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        self.pauli_sandwich(p, p)
    }

    /// `tr(rho P)`.
    pub fn expectation_complex(&self, p: &PauliOperator) -> Result<C64> {
        if p.width() != self.n_qubits() {
            return Err(NsqError::WidthMismatch(p.width(), self.n_qubits()));
        }
        let n = self.n_qubits();
        let data = &self.data;
        // tr(rho P) = sum_i <i|rho P|i> = sum_i rho[i, P(i)] * coeff
        Ok(crate::par::csum_range(1 << n, |i| {
            let (j, c) = p.act(i);
            data[(i << n) | j] * c
        }))
    }

    pub fn expectation(&self, p: &PauliOperator) -> Result<f64> {
        Ok(self.expectation_complex(p)?.re)
    }

    pub fn reduced_qubits(&self, keep: &[usize]) -> Result<CMat> {
        let n = self.n_qubits();
        check_keep(n, keep)?;
        let k = keep.len();
        let d = 1usize << k;
        let kmask: usize = keep.iter().map(|q| 1usize << q).sum();
        let spread = |j: usize| -> usize { (0..k).map(|b| (j >> b & 1) << keep[b]).sum() };
        let rest_bits: Vec<usize> = (0..n).filter(|q| kmask >> q & 1 == 0).collect();
        let keep_idx: Vec<usize> = (0..d).map(spread).collect();
        let rest_idx: Vec<usize> = (0..1usize << rest_bits.len())
            .map(|r| {
                rest_bits
                    .iter()
                    .enumerate()
                    .map(|(b, &q)| (r >> b & 1) << q)
                    .sum()
            })
            .collect();
        let vals = crate::par::map_range(d * d, |ab| {
            let (a, b) = (ab / d, ab % d);
            rest_idx
                .iter()
                .map(|&base| self.get(base | keep_idx[a], base | keep_idx[b]))
                .sum::<C64>()
        });
        Ok(CMat::from_fn(d, d, |a, b| vals[a * d + b]))
    }

    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let (layout, qubits) = sub_layout(&self.layout, keep)?;
        let m = self.reduced_qubits(&qubits)?;
        DensityMatrix::from_matrix(layout, &m)
    }

    /// Hermiticity, unit trace and eigenvalues above `-1e-10` (eigen check up to 10 qubits).
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_deviation();
        if h > 1e-10 {
            return Err(NsqError::InvalidState(format!("not Hermitian ({h:.2e})")));
        }
        let t = self.trace();
        if (t - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(NsqError::InvalidState(format!("trace {t}")));
        }
        if self.n_qubits() <= 10 {
            let ev = crate::linalg::hermitian_eigenvalues(&self.to_matrix());
            if ev[0] < -1e-10 {
                return Err(NsqError::InvalidState(format!("eigenvalue {}", ev[0])));
            }
        }
        Ok(())
    }
}
