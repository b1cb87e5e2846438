//! Toffoli from the two-system primitives, checked on three logical qubits.
//!
//! The primitives are controlled on the X-bar eigenvalue, and a CX on the
//! middle qubit would not change that eigenvalue, so the middle step uses CZ
//! (which flips it). The circuit
//! `CV(c1,t) CZ(c1,c2) CV^dag(c2,t) CZ(c1,c2) CV(c2,t)` applies X to the target
//! iff both controls have X-bar = -1; with logical H on both controls it is the
//! usual computational-basis Toffoli. `V^dag` is taken as `V^3`.

use crate::engine::GateOp;
use crate::error::Result;
use crate::gates::verify::{ideal_cx, ideal_cz, ideal_sqrt_cx, ideal_toffoli};
use crate::linalg::{identity, kron_le, mat_h, max_abs_diff, CMat};

/// `m` (ordered `kron_le([ctrl, tgt])`) acting on qubits `ctrl`, `tgt` of three.
fn on_three(m: &CMat, ctrl: usize, tgt: usize) -> Result<CMat> {
    GateOp::unitary("pair", vec![ctrl, tgt], m.clone())?.full_matrix(3)
}

/// Qubit order `[c1, c2, target]`.
pub fn toffoli_circuit() -> Result<CMat> {
    let v = ideal_sqrt_cx();
    let v_dag = &v * &v * &v;
    let cz = ideal_cz();
    let steps = [
        on_three(&v, 1, 2)?,
        on_three(&cz, 0, 1)?,
        on_three(&v_dag, 1, 2)?,
        on_three(&cz, 0, 1)?,
        on_three(&v, 0, 2)?,
    ];
    Ok(steps.iter().fold(identity(8), |acc, s| s * acc))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ToffoliCheck {
    /// Entrywise gap to the computational-basis Toffoli after logical H on both controls.
    pub residual: f64,
    /// `V^2 - X` on one qubit.
    pub v_squared_residual: f64,
    /// `(sqrt CX)^2 - CX` on two qubits.
    pub sqrt_cx_squared_residual: f64,
}

pub fn toffoli_identity_check() -> Result<ToffoliCheck> {
    let h = mat_h();
    let hh = kron_le(&[h.clone(), h, identity(2)]);
    let u = &hh * toffoli_circuit()? * &hh;
    let v = crate::linalg::mat_v();
    let s = ideal_sqrt_cx();
    Ok(ToffoliCheck {
        residual: max_abs_diff(&u, &ideal_toffoli()),
        v_squared_residual: max_abs_diff(&(&v * &v), &crate::linalg::mat_x()),
        sqrt_cx_squared_residual: max_abs_diff(&(&s * &s), &ideal_cx()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_holds() {
        let c = toffoli_identity_check().unwrap();
        assert!(c.residual < 1e-12, "{c:?}");
        assert!(c.v_squared_residual < 1e-12);
        assert!(c.sqrt_cx_squared_residual < 1e-12);
    }

    #[test]
    fn controls_11_flip_the_target() {
        let h = mat_h();
        let hh = kron_le(&[h.clone(), h, identity(2)]);
        let u = &hh * toffoli_circuit().unwrap() * &hh;
        // |c1=1, c2=1, t=0> is index 3
        assert!((u[(7, 3)].norm() - 1.0).abs() < 1e-12);
    }
}
