use super::state::DensityMatrix;
use crate::error::{NsqError, Result};
use crate::linalg::CMat;
use crate::pauli::PauliOperator;
use crate::C64;

/// One operator-sum element.
#[derive(Debug, Clone)]
pub enum KrausOp {
    /// Matrix on a qubit subset (target j = bit j).
    Dense { targets: Vec<usize>, matrix: CMat },
    /// `coef * P` with `P` spanning the whole register.
    Pauli { coef: C64, op: PauliOperator },
    /// `sum_j c_j P_j`, all terms on the same register.
    PauliSum(Vec<(C64, PauliOperator)>),
}

impl KrausOp {
    pub fn targets(&self) -> Vec<usize> {
        match self {
            KrausOp::Dense { targets, .. } => targets.clone(),
            KrausOp::Pauli { op, .. } => (0..op.width()).filter(|q| op.support() >> q & 1 == 1).collect(),
            KrausOp::PauliSum(terms) => {
                let s = terms.iter().fold(0u64, |a, (_, p)| a | p.support());
                (0..64).filter(|q| s >> q & 1 == 1).collect()
            }
        }
    }

    /// Matrix on the given qubit list (must cover the element's support).
    pub fn matrix_on(&self, qubits: &[usize]) -> Result<CMat> {
        match self {
            KrausOp::Dense { targets, matrix } => {
                let local: Vec<usize> = targets
                    .iter()
                    .map(|q| {
                        qubits
                            .iter()
                            .position(|x| x == q)
                            .ok_or(NsqError::OutOfRange(*q))
                    })
                    .collect::<Result<_>>()?;
                let g = super::gate::GateOp {
                    name: "kraus".into(),
                    targets: local,
                    kind: super::gate::GateKind::Dense(matrix.clone()),
                    vertices: None,
                };
                g.full_matrix(qubits.len())
            }
            KrausOp::Pauli { coef, op } => {
                let outside = op.support() & !qubits.iter().map(|q| 1u64 << q).sum::<u64>();
                if outside != 0 {
                    return Err(NsqError::OutOfRange(outside.trailing_zeros() as usize));
                }
                Ok(op.restrict(qubits).dense_matrix()? * *coef)
            }
            KrausOp::PauliSum(terms) => {
                let d = 1usize << qubits.len();
                let mut m = CMat::zeros(d, d);
                for (c, p) in terms {
                    m += KrausOp::Pauli { coef: *c, op: *p }.matrix_on(qubits)?;
                }
                Ok(m)
            }
        }
    }
}

impl DensityMatrix {
    /// `sum_k E_k rho E_k^dag`, no completeness check.
    pub fn apply_operator_sum(&mut self, ops: &[KrausOp]) -> Result<()> {
        let mut acc: Option<DensityMatrix> = None;
        for op in ops {
            let mut t = self.clone();
            match op {
                KrausOp::Dense { targets, matrix } => t.sandwich(targets, matrix, matrix)?,
                KrausOp::Pauli { coef, op } => {
                    t.conjugate_pauli(op)?;
                    t.scale(coef.norm_sqr());
                }
                KrausOp::PauliSum(terms) => {
                    let mut sum: Option<DensityMatrix> = None;
                    for (ci, pi) in terms {
                        for (cj, pj) in terms {
                            let mut u = self.clone();
                            u.pauli_sandwich(pi, pj)?;
                            u.scale_complex(ci * cj.conj());
                            match sum.as_mut() {
                                None => sum = Some(u),
                                Some(a) => a.add_assign(&u)?,
                            }
                        }
                    }
                    match sum {
                        Some(s) => t = s,
                        None => t.scale(0.0),
                    }
                }
            }
            match acc.as_mut() {
                None => acc = Some(t),
                Some(a) => a.add_assign(&t)?,
            }
        }
        if let Some(a) = acc {
            *self = a;
        }
        Ok(())
    }
}
