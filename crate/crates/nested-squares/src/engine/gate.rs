use serde::Serialize;

use super::kernels;
use crate::error::{NsqError, Result};
use crate::linalg::{identity, unitarity_deviation, CMat};
use crate::pauli::PauliOperator;
use crate::C64;

const ZERO_TOL: f64 = 1e-14;
pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum GateKind {
    Dense(CMat),
    /// Column j goes to row `perm[j]` times `phase[j]`.
    Monomial { perm: Vec<usize>, phase: Vec<C64> },
    Diagonal(Vec<C64>),
    /// Pauli string on the targets (width = number of targets).
    Pauli(PauliOperator),
}

/// A unitary on a set of qubits, with optional vertex conditions kept for export.
#[derive(Debug, Clone)]
pub struct GateOp {
    pub name: String,
    pub targets: Vec<usize>,
    pub kind: GateKind,
    pub vertices: Option<Vec<(u8, u8)>>,
}

/// Export form of a gate.
#[derive(Debug, Clone, Serialize)]
pub struct GateInfo {
    pub name: String,
    pub targets: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<String>>,
}

fn classify(m: &CMat) -> GateKind {
    let d = m.nrows();
    let mut perm = Vec::with_capacity(d);
    let mut phase = Vec::with_capacity(d);
    for j in 0..d {
        let nz: Vec<usize> = (0..d).filter(|&i| m[(i, j)].norm() > ZERO_TOL).collect();
        if nz.len() != 1 {
            return GateKind::Dense(m.clone());
        }
        perm.push(nz[0]);
        phase.push(m[(nz[0], j)]);
    }
    if perm.iter().enumerate().all(|(j, &i)| i == j) {
        GateKind::Diagonal(phase)
    } else {
        GateKind::Monomial { perm, phase }
    }
}

impl GateOp {
    /// Unitary gate from its matrix; rejects non-unitary input.
    pub fn unitary(name: impl Into<String>, targets: Vec<usize>, m: CMat) -> Result<Self> {
        check_targets(&targets)?;
        if m.nrows() != 1 << targets.len() || m.ncols() != m.nrows() {
            return Err(NsqError::Other(format!(
                "matrix {}x{} does not fit {} targets",
                m.nrows(),
                m.ncols(),
                targets.len()
            )));
        }
        let dev = unitarity_deviation(&m);
        if dev > UNITARY_TOL {
            return Err(NsqError::NotUnitary(dev));
        }
        Ok(GateOp {
            name: name.into(),
            targets,
            kind: classify(&m),
            vertices: None,
        })
    }

    pub fn pauli(name: impl Into<String>, targets: Vec<usize>, p: PauliOperator) -> Result<Self> {
        check_targets(&targets)?;
        if p.width() != targets.len() {
            return Err(NsqError::WidthMismatch(p.width(), targets.len()));
        }
        Ok(GateOp {
            name: name.into(),
            targets,
            kind: GateKind::Pauli(p),
            vertices: None,
        })
    }

    /// Pauli over a full register, restricted to its support.
    pub fn from_register_pauli(name: impl Into<String>, p: &PauliOperator) -> Self {
        let targets: Vec<usize> = (0..p.width()).filter(|q| p.support() >> q & 1 == 1).collect();
        let targets = if targets.is_empty() { vec![0] } else { targets };
        let r = p.restrict(&targets);
        GateOp {
            name: name.into(),
            targets,
            kind: GateKind::Pauli(r),
            vertices: None,
        }
    }

    pub fn with_vertices(mut self, v: Vec<(u8, u8)>) -> Self {
        self.vertices = Some(v);
        self
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    /// Matrix on the targets (target j = bit j).
    pub fn matrix(&self) -> CMat {
        let d = 1usize << self.targets.len();
        match &self.kind {
            GateKind::Dense(m) => m.clone(),
            GateKind::Monomial { perm, phase } => {
                let mut m = CMat::zeros(d, d);
                for j in 0..d {
                    m[(perm[j], j)] = phase[j];
                }
                m
            }
            GateKind::Diagonal(dg) => CMat::from_diagonal(&nalgebra::DVector::from_vec(dg.clone())),
            GateKind::Pauli(p) => p.dense_matrix().expect("pauli gate width is small"),
        }
    }

    /// Inverse gate.
    pub fn inverse(&self) -> GateOp {
        let kind = match &self.kind {
            GateKind::Pauli(p) => GateKind::Pauli(p.adjoint()),
            _ => classify(&self.matrix().adjoint()),
        };
        GateOp {
            name: format!("{}^-1", self.name),
            targets: self.targets.clone(),
            kind,
            vertices: self.vertices.clone(),
        }
    }

    /// Same gate on relabeled qubits.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> GateOp {
        GateOp {
            targets: self.targets.iter().map(|&q| f(q)).collect(),
            ..self.clone()
        }
    }

    pub fn max_target(&self) -> usize {
        *self.targets.iter().max().unwrap_or(&0)
    }

    pub fn is_pauli(&self) -> bool {
        matches!(self.kind, GateKind::Pauli(_))
    }

    /// Apply to a flat buffer of `n` qubits. `conj` applies the entrywise conjugate.
    pub fn apply_buffer(&self, amps: &mut [C64], n: usize, offset: usize, conj: bool) {
        let t: Vec<usize> = self.targets.iter().map(|q| q + offset).collect();
        match &self.kind {
            GateKind::Dense(m) => {
                let m = if conj { m.map(|z| z.conj()) } else { m.clone() };
                kernels::apply_dense(amps, n, &t, &m)
            }
            GateKind::Monomial { perm, phase } => {
                let ph: Vec<C64> = if conj { phase.iter().map(|z| z.conj()).collect() } else { phase.clone() };
                kernels::apply_monomial(amps, n, &t, perm, &ph)
            }
            GateKind::Diagonal(dg) => {
                let dg: Vec<C64> = if conj { dg.iter().map(|z| z.conj()).collect() } else { dg.clone() };
                kernels::apply_diagonal(amps, &t, &dg)
            }
            GateKind::Pauli(p) => {
                let full = p.embed(n, &t).expect("targets checked against width");
                kernels::apply_pauli(amps, &full, conj)
            }
        }
    }

    /// Full `2^n` matrix, built column by column. Reference path for small widths.
    pub fn full_matrix(&self, n: usize) -> Result<CMat> {
        if n > 10 {
            return Err(NsqError::WidthLimit { width: n, limit: 10 });
        }
        if self.max_target() >= n {
            return Err(NsqError::OutOfRange(self.max_target()));
        }
        let small = self.matrix();
        let d = 1usize << n;
        let k = self.targets.len();
        let tmask: usize = self.targets.iter().map(|q| 1usize << q).sum();
        let mut full = CMat::zeros(d, d);
        for col in 0..d {
            let jc: usize = (0..k).map(|b| (col >> self.targets[b] & 1) << b).sum();
            let rest = col & !tmask;
            for jr in 0..1usize << k {
                let v = small[(jr, jc)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = rest | (0..k).map(|b| (jr >> b & 1) << self.targets[b]).sum::<usize>();
                full[(row, col)] = v;
            }
        }
        Ok(full)
    }

    pub fn info(&self) -> GateInfo {
        GateInfo {
            name: self.name.clone(),
            targets: self.targets.clone(),
            vertices: self
                .vertices
                .as_ref()
                .map(|v| v.iter().map(|(x, y)| format!("{x}{y}")).collect()),
        }
    }
}

fn check_targets(t: &[usize]) -> Result<()> {
    if t.is_empty() {
        return Err(NsqError::Other("gate needs at least one target".into()));
    }
    for (i, q) in t.iter().enumerate() {
        if t[..i].contains(q) {
            return Err(NsqError::Other(format!("repeated target {q}")));
        }
    }
    Ok(())
}

/// Product of gates as one matrix on the union of their targets (first gate applied first).
pub fn compose(gates: &[GateOp]) -> (Vec<usize>, CMat) {
    let mut targets: Vec<usize> = gates.iter().flat_map(|g| g.targets.iter().copied()).collect();
    targets.sort_unstable();
    targets.dedup();
    let k = targets.len();
    let d = 1usize << k;
    let mut m = identity(d);
    for g in gates {
        let local = g.remap(|q| targets.iter().position(|&t| t == q).unwrap());
        // apply to each column of m
        for col in 0..d {
            let mut v: Vec<C64> = m.column(col).iter().copied().collect();
            local.apply_buffer(&mut v, k, 0, false);
            for (r, z) in v.into_iter().enumerate() {
                m[(r, col)] = z;
            }
        }
    }
    (targets, m)
}

/// Read a matrix as `i^k X^x Z^z` if it is one.
pub fn matrix_to_pauli(m: &CMat) -> Option<PauliOperator> {
    let d = m.nrows();
    let k = d.trailing_zeros() as usize;
    let row_of = |j: usize| (0..d).find(|&i| m[(i, j)].norm() > 1e-9);
    let x = row_of(0)?;
    let a0 = m[(x, 0)];
    let mut z = 0u64;
    for b in 0..k {
        let v = m[(x ^ (1 << b), 1 << b)];
        if (v + a0).norm() < 1e-9 {
            z |= 1 << b;
        }
    }
    let phase = (0..4u8).find(|&ph| (crate::pauli::i_pow(ph) - a0).norm() < 1e-9)?;
    let p = PauliOperator::from_parts(k, phase, x as u64, z).ok()?;
    let dense = p.dense_matrix().ok()?;
    (crate::linalg::max_abs_diff(&dense, m) < 1e-9).then_some(p)
}

/// `U P U^dag` for `U` acting on `targets` of the register `P` lives on.
/// Fails when the result is not a Pauli string.
pub fn conjugate_pauli(targets: &[usize], u: &CMat, p: &PauliOperator) -> Result<PauliOperator> {
    let local = p.restrict(targets);
    if local.xmask() == 0 && local.zmask() == 0 {
        return Ok(*p);
    }
    let m = u * local.with_phase(0).dense_matrix()? * u.adjoint();
    let q = matrix_to_pauli(&m).ok_or_else(|| {
        NsqError::NonClifford(format!("conjugation on qubits {targets:?}"))
    })?;
    let rest = p.restrict_complement(targets);
    let embedded = q.embed(p.width(), targets)?;
    Ok(rest.multiply(&embedded)?.times_i(p.phase()))
}
