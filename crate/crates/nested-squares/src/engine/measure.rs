use rand::Rng;

use super::state::{DensityMatrix, StateVector};
use crate::error::{NsqError, Result};
use crate::linalg::{identity, max_abs_diff, CMat};
use crate::pauli::PauliOperator;
use crate::C64;

/// Branches below this probability are never selected and are pruned.
pub const DEGENERATE_PROB: f64 = 1e-14;

#[derive(Debug, Clone)]
pub enum Projector {
    /// Matrix on a qubit subset.
    Dense { targets: Vec<usize>, matrix: CMat },
    /// `prod_k (I + (-1)^{s_k} P_k) / 2` over commuting Hermitian strings.
    Pauli(Vec<(PauliOperator, bool)>),
}

impl Projector {
    /// `|bit><bit|` on one qubit.
    pub fn qubit(q: usize, bit: usize) -> Self {
        Projector::Dense {
            targets: vec![q],
            matrix: crate::linalg::proj(bit),
        }
    }

    pub fn apply_state(&self, psi: &mut StateVector) -> Result<()> {
        match self {
            Projector::Dense { targets, matrix } => psi.apply_matrix(targets, matrix),
            Projector::Pauli(fs) => {
                for (p, neg) in fs {
                    let mut other = psi.clone();
                    other.apply_pauli(p)?;
                    let s = if *neg { -0.5 } else { 0.5 };
                    for (a, b) in psi.amplitudes_mut().iter_mut().zip(other.amplitudes()) {
                        *a = *a * 0.5 + b * s;
                    }
                }
                Ok(())
            }
        }
    }

    /// `rho <- Pi rho Pi`.
    pub fn apply_density(&self, rho: &mut DensityMatrix) -> Result<()> {
        match self {
            Projector::Dense { targets, matrix } => rho.sandwich(targets, matrix, matrix),
            Projector::Pauli(fs) => {
                for (p, neg) in fs {
                    // (I + sP) rho (I + sP) / 4 = (rho + s P rho + s rho P + P rho P) / 4
                    let id = PauliOperator::identity(p.width());
                    let s = if *neg { -1.0 } else { 1.0 };
                    let mut a = rho.clone();
                    a.pauli_sandwich(p, &id)?;
                    let mut b = rho.clone();
                    b.pauli_sandwich(&id, p)?;
                    let mut c = rho.clone();
                    c.conjugate_pauli(p)?;
                    a.add_assign(&b)?;
                    a.scale(s);
                    rho.add_assign(&a)?;
                    rho.add_assign(&c)?;
                    rho.scale(0.25);
                }
                Ok(())
            }
        }
    }

    fn dense_on(&self, n: usize) -> Result<CMat> {
        match self {
            Projector::Dense { targets, matrix } => {
                let g = super::gate::GateOp {
                    name: "proj".into(),
                    targets: targets.clone(),
                    kind: super::gate::GateKind::Dense(matrix.clone()),
                    vertices: None,
                };
                g.full_matrix(n)
            }
            Projector::Pauli(fs) => {
                let d = 1usize << n;
                let mut m = identity(d);
                for (p, neg) in fs {
                    let pm = p.dense_matrix()?;
                    let s = if *neg { -0.5 } else { 0.5 };
                    m = &m * (identity(d) * C64::new(0.5, 0.0) + pm * C64::new(s, 0.0));
                }
                Ok(m)
            }
        }
    }
}

/// Check Hermitian, idempotent and complete. Dense check up to 10 qubits; Pauli
/// families are checked structurally.
pub fn validate_projectors(projectors: &[Projector], n: usize) -> Result<()> {
    if projectors.is_empty() {
        return Err(NsqError::InvalidProjectors("empty set".into()));
    }
    if projectors.iter().all(|p| matches!(p, Projector::Pauli(_))) {
        return validate_pauli_family(projectors);
    }
    if n > 10 {
        // dense check on the union of targets
        let mut t: Vec<usize> = Vec::new();
        for p in projectors {
            match p {
                Projector::Dense { targets, .. } => t.extend(targets),
                Projector::Pauli(_) => {
                    return Err(NsqError::InvalidProjectors("mixed projector kinds".into()))
                }
            }
        }
        t.sort_unstable();
        t.dedup();
        let local: Vec<Projector> = projectors
            .iter()
            .map(|p| match p {
                Projector::Dense { targets, matrix } => Projector::Dense {
                    targets: targets.iter().map(|q| t.iter().position(|x| x == q).unwrap()).collect(),
                    matrix: matrix.clone(),
                },
                Projector::Pauli(_) => unreachable!(),
            })
            .collect();
        return validate_projectors(&local, t.len());
    }
    let d = 1usize << n;
    let mut sum = CMat::zeros(d, d);
    for (k, p) in projectors.iter().enumerate() {
        let m = p.dense_on(n)?;
        if max_abs_diff(&m, &m.adjoint()) > 1e-10 {
            return Err(NsqError::InvalidProjectors(format!("projector {k} not Hermitian")));
        }
        if max_abs_diff(&(&m * &m), &m) > 1e-10 {
            return Err(NsqError::InvalidProjectors(format!("projector {k} not idempotent")));
        }
        sum += m;
    }
    let dev = max_abs_diff(&sum, &identity(d));
    if dev > 1e-10 {
        return Err(NsqError::InvalidProjectors(format!("sum deviates from identity by {dev:.2e}")));
    }
    Ok(())
}

fn validate_pauli_family(projectors: &[Projector]) -> Result<()> {
    let mut gens: Option<Vec<PauliOperator>> = None;
    let mut patterns = Vec::new();
    for p in projectors {
        let Projector::Pauli(fs) = p else { unreachable!() };
        let g: Vec<PauliOperator> = fs.iter().map(|(q, _)| *q).collect();
        match &gens {
            None => gens = Some(g),
            Some(h) if *h == g => {}
            _ => return Err(NsqError::InvalidProjectors("different generator lists".into())),
        }
        let pat: u64 = fs.iter().enumerate().map(|(i, (_, s))| (*s as u64) << i).sum();
        if patterns.contains(&pat) {
            return Err(NsqError::InvalidProjectors("repeated sign pattern".into()));
        }
        patterns.push(pat);
    }
    let g = gens.unwrap();
    for (i, a) in g.iter().enumerate() {
        if !a.is_hermitian() || a.is_identity_up_to_phase() {
            return Err(NsqError::InvalidProjectors(format!("generator {i} not a Hermitian non-identity string")));
        }
        for b in &g[i + 1..] {
            if a.symplectic(b) == 1 {
                return Err(NsqError::InvalidProjectors("generators do not commute".into()));
            }
        }
    }
    let group = crate::pauli::PauliGroup::new(g[0].width(), g.clone())?;
    if group.rank() != g.len() || group.contains_minus_identity() {
        return Err(NsqError::InvalidProjectors("generators are dependent".into()));
    }
    if patterns.len() != 1 << g.len() {
        return Err(NsqError::InvalidProjectors(format!(
            "{} of {} sign patterns present",
            patterns.len(),
            1 << g.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Branch<S> {
    pub outcome: usize,
    pub probability: f64,
    pub state: S,
}

/// Born probabilities and renormalized post-states for every outcome above the
/// degenerate threshold.
pub fn enumerate(psi: &StateVector, projectors: &[Projector]) -> Result<Vec<Branch<StateVector>>> {
    validate_projectors(projectors, psi.n_qubits())?;
    let mut out = Vec::new();
    for (k, p) in projectors.iter().enumerate() {
        let mut s = psi.clone();
        p.apply_state(&mut s)?;
        let prob = s.norm_sqr();
        if prob < DEGENERATE_PROB {
            continue;
        }
        s.normalize();
        out.push(Branch {
            outcome: k,
            probability: prob,
            state: s,
        });
    }
    Ok(out)
}

/// Sample one outcome with `rng`.
pub fn measure<R: Rng + ?Sized>(
    psi: &StateVector,
    projectors: &[Projector],
    rng: &mut R,
) -> Result<Branch<StateVector>> {
    let branches = enumerate(psi, projectors)?;
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    let mut u: f64 = rng.random::<f64>() * total;
    let last = branches.len() - 1;
    for (i, b) in branches.into_iter().enumerate() {
        if u < b.probability || i == last {
            return Ok(b);
        }
        u -= b.probability;
    }
    unreachable!()
}

/// Density-matrix branches: unnormalized `Pi rho Pi` kept with its trace.
pub fn enumerate_density(rho: &DensityMatrix, projectors: &[Projector]) -> Result<Vec<Branch<DensityMatrix>>> {
    validate_projectors(projectors, rho.n_qubits())?;
    let mut out = Vec::new();
    for (k, p) in projectors.iter().enumerate() {
        let mut s = rho.clone();
        p.apply_density(&mut s)?;
        let prob = s.trace().re;
        if prob < DEGENERATE_PROB {
            continue;
        }
        s.scale(1.0 / prob);
        out.push(Branch {
            outcome: k,
            probability: prob,
            state: s,
        });
    }
    Ok(out)
}
