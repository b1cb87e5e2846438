//! Immediate recovery, Pauli frames, and the density-matrix pipelines that
//! compare per-round correction with deferred correction.
//!
//! Everything works on the nine code qubits. Sector `m` (the syndrome-`m`
//! eigenspace) is spanned by `sigma_m` applied to the eight codespace vectors,
//! and those vectors are sparse, so projections are cheap sandwiches.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::code::{NestedSquaresCode, Syndrome, SubsystemFrame, N_QUBITS};
use crate::engine::{DensityMatrix, StateVector};
use crate::error::{NsqError, Result};
use crate::layout::RegisterLayout;
use crate::linalg::{c, CMat};
use crate::noise::KrausChannel;
use crate::pauli::PauliOperator;
use crate::C64;

/// Branches lighter than this are dropped by the deferred pipeline.
pub const BRANCH_CUTOFF: f64 = 1e-14;

/// Rewrite a code-register operator for a register that holds P0, P2, P4.
pub fn lift(code: &NestedSquaresCode, p: &PauliOperator, layout: &RegisterLayout) -> Result<PauliOperator> {
    if layout == code.layout() {
        return Ok(*p);
    }
    let targets = (0..N_QUBITS)
        .map(|q| {
            let (id, slot) = code.layout().locate(q).ok_or(NsqError::OutOfRange(q))?;
            layout.qubit(id, slot)
        })
        .collect::<Result<Vec<_>>>()?;
    p.embed(layout.n_qubits(), &targets)
}

/// Apply `sigma_m^dag`.
pub fn correct_now(code: &NestedSquaresCode, psi: &mut StateVector, m: Syndrome) -> Result<()> {
    let r = lift(code, &code.recovery_operator(m).adjoint(), psi.layout())?;
    psi.apply_pauli(&r)
}

/// Accumulated recovery operator `sigma_{m^{N-1}} ... sigma_{m^0}` plus the
/// per-round syndromes it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PauliFrame {
    accumulated: PauliOperator,
    history: Vec<Syndrome>,
}

impl Default for PauliFrame {
    fn default() -> Self {
        PauliFrame::new()
    }
}

impl PauliFrame {
    pub fn new() -> Self {
        PauliFrame {
            accumulated: PauliOperator::identity(N_QUBITS),
            history: Vec::new(),
        }
    }

    /// Record round syndrome `m`: the newest `sigma_m` goes on the left.
    pub fn push(&mut self, code: &NestedSquaresCode, m: Syndrome) {
        self.accumulated = code.recovery_operator(m).multiply(&self.accumulated).expect("nine qubits");
        self.history.push(m);
    }

    /// Push the change between a raw (uncorrected) syndrome and what the
    /// frame already explains; returns the increment.
    pub fn observe(&mut self, code: &NestedSquaresCode, raw: Syndrome) -> Syndrome {
        let inc = raw.xor(self.syndrome());
        self.push(code, inc);
        inc
    }

    pub fn accumulated(&self) -> &PauliOperator {
        &self.accumulated
    }

    pub fn history(&self) -> &[Syndrome] {
        &self.history
    }

    /// Syndrome the frame expects to see on the uncorrected state.
    pub fn syndrome(&self) -> Syndrome {
        self.history.iter().fold(Syndrome::ZERO, |a, m| a.xor(*m))
    }

    /// `(sigma_{m^{N-1}} ... sigma_{m^0})^dag`, applied once at the end.
    pub fn correction(&self) -> PauliOperator {
        self.accumulated.adjoint()
    }

    pub fn apply_to_state(&self, code: &NestedSquaresCode, psi: &mut StateVector) -> Result<()> {
        psi.apply_pauli(&lift(code, &self.correction(), psi.layout())?)
    }

    pub fn apply_to_density(&self, code: &NestedSquaresCode, rho: &mut DensityMatrix) -> Result<()> {
        rho.conjugate_pauli(&lift(code, &self.correction(), rho.layout())?)
    }

    /// One `round,i,m_bits,accumulated_pauli_string` line per pushed syndrome.
    pub fn log_lines(&self, code: &NestedSquaresCode, round: usize) -> Vec<String> {
        let mut f = PauliFrame::new();
        self.history
            .iter()
            .enumerate()
            .map(|(i, m)| {
                f.push(code, *m);
                format!("{round},{i},{},{}", m.to_bit_string(), code.text(f.accumulated()))
            })
            .collect()
    }
}

type SparseCol = Vec<(usize, C64)>;

fn pauli_col(p: &PauliOperator, col: &SparseCol) -> SparseCol {
    col.iter()
        .map(|&(i, a)| {
            let (j, ph) = p.act(i);
            (j, ph * a)
        })
        .collect()
}

/// Recovery map `R(rho) = sum_m sigma_m^dag P_m rho P_m sigma_m` and syndrome
/// projections on the code register.
#[derive(Debug, Clone)]
pub struct Recovery {
    code: NestedSquaresCode,
    /// Codespace basis (syndrome 0), sparse columns.
    v0: Vec<SparseCol>,
    sigma: Vec<PauliOperator>,
    /// All 64 stabilizer products, indexed by generator subset.
    products: Vec<PauliOperator>,
}

impl Recovery {
    pub fn new(code: &NestedSquaresCode) -> Result<Self> {
        let frame = SubsystemFrame::new(code)?;
        let v = frame.virtual_basis();
        let v0 = (0..8)
            .map(|k| {
                let col = v.column(k << 6);
                col.iter()
                    .enumerate()
                    .filter(|(_, a)| a.norm() > 1e-15)
                    .map(|(i, a)| (i, *a))
                    .collect()
            })
            .collect();
        let products = (0..64usize)
            .map(|s| {
                (0..6)
                    .filter(|i| s >> i & 1 == 1)
                    .fold(PauliOperator::identity(N_QUBITS), |p, i| p.multiply(&code.stabilizer(i)).unwrap())
            })
            .collect();
        Ok(Recovery {
            code: code.clone(),
            v0,
            sigma: Syndrome::all().map(|m| code.recovery_operator(m)).collect(),
            products,
        })
    }

    pub fn code(&self) -> &NestedSquaresCode {
        &self.code
    }

    fn check(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.layout() != self.code.layout() {
            return Err(NsqError::Layout("recovery runs on the bare code register".into()));
        }
        Ok(())
    }

    /// Sparse basis of sector `m`.
    fn sector(&self, m: Syndrome) -> Vec<SparseCol> {
        let s = &self.sigma[m.bits() as usize];
        self.v0.iter().map(|col| pauli_col(s, col)).collect()
    }

    /// `W^dag rho W` for sparse columns `W`.
    fn compress(rho: &DensityMatrix, w: &[SparseCol]) -> CMat {
        CMat::from_fn(w.len(), w.len(), |k, l| {
            let mut acc = c(0., 0.);
            for &(i, a) in &w[k] {
                for &(j, b) in &w[l] {
                    acc += a.conj() * rho.get(i, j) * b;
                }
            }
            acc
        })
    }

    /// `W a W^dag` written into a fresh matrix.
    fn expand(&self, a: &CMat, w: &[SparseCol]) -> Result<DensityMatrix> {
        let d = 1usize << N_QUBITS;
        let mut m = CMat::zeros(d, d);
        for (k, wk) in w.iter().enumerate() {
            for (l, wl) in w.iter().enumerate() {
                let z = a[(k, l)];
                if z.norm() == 0.0 {
                    continue;
                }
                for &(i, x) in wk {
                    for &(j, y) in wl {
                        m[(i, j)] += x * z * y.conj();
                    }
                }
            }
        }
        DensityMatrix::from_matrix(self.code.layout().clone(), &m)
    }

    /// `tr(P_m rho)` for every `m`, from the 64 stabilizer expectations.
    pub fn syndrome_probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        self.check(rho)?;
        let e: Vec<f64> = self
            .products
            .iter()
            .map(|p| rho.expectation_complex(p).map(|z| z.re))
            .collect::<Result<_>>()?;
        Ok((0..64usize)
            .map(|m| {
                (0..64usize)
                    .map(|s| if (s & m).count_ones() % 2 == 1 { -e[s] } else { e[s] })
                    .sum::<f64>()
                    / 64.0
            })
            .collect())
    }

    /// `P_m rho P_m`, unnormalized.
    pub fn project(&self, rho: &DensityMatrix, m: Syndrome) -> Result<DensityMatrix> {
        self.check(rho)?;
        let w = self.sector(m);
        self.expand(&Self::compress(rho, &w), &w)
    }

    /// `sum_m sigma_m^dag P_m rho P_m sigma_m`. Uses `sigma_m^dag P_m = P_0 sigma_m^dag`,
    /// so every term lands in the codespace.
    pub fn recover(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check(rho)?;
        let mut a = CMat::zeros(8, 8);
        for m in Syndrome::all() {
            a += Self::compress(rho, &self.sector(m));
        }
        self.expand(&a, &self.v0)
    }

    /// `(R . E_{N-1}) ... (R . E_0)`.
    pub fn immediate(&self, rho: &DensityMatrix, rounds: &[KrausChannel]) -> Result<DensityMatrix> {
        let mut r = rho.clone();
        for ch in rounds {
            ch.apply(&mut r)?;
            r = self.recover(&r)?;
        }
        Ok(r)
    }

    /// Measure every round without correcting, track a frame per branch and
    /// apply each branch's accumulated correction once at the end.
    pub fn deferred(&self, rho: &DensityMatrix, rounds: &[KrausChannel]) -> Result<DeferredRun> {
        self.check(rho)?;
        let mut branches = vec![(PauliFrame::new(), rho.clone())];
        let mut peak = 1;
        for ch in rounds {
            // branches whose frames agree up to phase act identically; merge them
            let mut next: BTreeMap<(u64, u64), (PauliFrame, DensityMatrix)> = BTreeMap::new();
            for (frame, mut r) in branches {
                ch.apply(&mut r)?;
                let probs = self.syndrome_probabilities(&r)?;
                for (m, p) in Syndrome::all().zip(&probs) {
                    if *p < BRANCH_CUTOFF {
                        continue;
                    }
                    let proj = self.project(&r, m)?;
                    let mut f = frame.clone();
                    f.observe(&self.code, m);
                    let key = (f.accumulated().xmask(), f.accumulated().zmask());
                    match next.get_mut(&key) {
                        Some((_, acc)) => acc.add_assign(&proj)?,
                        None => {
                            next.insert(key, (f, proj));
                        }
                    }
                }
            }
            branches = next.into_values().collect();
            peak = peak.max(branches.len());
        }
        let mut out: Option<DensityMatrix> = None;
        let mut frames = Vec::with_capacity(branches.len());
        for (frame, mut r) in branches {
            let w = r.trace().re;
            frame.apply_to_density(&self.code, &mut r)?;
            match out.as_mut() {
                None => out = Some(r),
                Some(o) => o.add_assign(&r)?,
            }
            frames.push((frame, w));
        }
        Ok(DeferredRun {
            state: out.ok_or_else(|| NsqError::Other("every branch vanished".into()))?,
            frames,
            peak_branches: peak,
        })
    }
}

#[derive(Debug, Clone)]
pub struct DeferredRun {
    pub state: DensityMatrix,
    /// One representative frame per merged branch, with its weight.
    pub frames: Vec<(PauliFrame, f64)>,
    pub peak_branches: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn projections_match_the_dense_projector() {
        let code = NestedSquaresCode::new();
        let rec = Recovery::new(&code).unwrap();
        let rho = DensityMatrix::maximally_mixed(code.layout().clone()).unwrap();
        for m in [Syndrome::ZERO, Syndrome::new(5), Syndrome::new(0b110001)] {
            let p = code.projector(m);
            let want = &p * rho.to_matrix() * &p;
            let got = rec.project(&rho, m).unwrap().to_matrix();
            assert!(max_abs_diff(&got, &want) < 1e-14);
        }
        let probs = rec.syndrome_probabilities(&rho).unwrap();
        assert!(probs.iter().all(|p| (p - 1.0 / 64.0).abs() < 1e-14));
    }

    #[test]
    fn recovery_is_trace_preserving() {
        let code = NestedSquaresCode::new();
        let rec = Recovery::new(&code).unwrap();
        let rho = DensityMatrix::maximally_mixed(code.layout().clone()).unwrap();
        let out = rec.recover(&rho).unwrap();
        assert!((out.trace() - c(1., 0.)).norm() < 1e-12);
    }
}
