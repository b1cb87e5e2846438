//! Checks logical gates against their ideal 2x2 / 4x4 action. Logical operators
//! are ordered `kron_le([control, target])`, so the control is the low bit.

use rand::Rng;
use serde::Serialize;

use crate::code::NestedSquaresCode;
use crate::engine::StateVector;
use crate::error::{NsqError, Result};
use crate::gates::system::TwoSystemLayout;
use crate::layout::RegisterLayout;
use crate::linalg::{c, identity, kron_le, mat_v, mat_x, mat_y, mat_z, outer, trace_distance, CMat};
use crate::pauli::PauliOperator;
use crate::program::Program;
use crate::C64;

fn halves() -> (CMat, CMat) {
    let i = identity(2);
    let x = mat_x();
    ((&i + &x).scale(0.5), (&i - &x).scale(0.5))
}

/// `Pi_+(X) x I + Pi_-(X) x U` with the X-eigenvalue of the control selecting `U`.
fn x_controlled(u: &CMat) -> CMat {
    let (plus, minus) = halves();
    kron_le(&[plus, identity(2)]) + kron_le(&[minus, u.clone()])
}

pub fn ideal_cx() -> CMat {
    x_controlled(&mat_x())
}

pub fn ideal_sqrt_cx() -> CMat {
    x_controlled(&mat_v())
}

pub fn ideal_cz() -> CMat {
    x_controlled(&mat_z())
}

/// Standard computational-basis CCX on `kron_le([c1, c2, target])`.
pub fn ideal_toffoli() -> CMat {
    let mut m = identity(8);
    m[(3, 3)] = c(0., 0.);
    m[(7, 7)] = c(0., 0.);
    m[(3, 7)] = c(1., 0.);
    m[(7, 3)] = c(1., 0.);
    m
}

/// A random gauge-group element on one system (stabilizers included).
pub fn random_gauge<R: Rng + ?Sized>(code: &NestedSquaresCode, rng: &mut R) -> PauliOperator {
    code.random_gauge(rng)
}

/// Two encoded systems holding `sum c[a + 2b] |a>_control |b>_target`.
pub fn encode_pair(code: &NestedSquaresCode, sys: &TwoSystemLayout, coeffs: &[C64; 4]) -> Result<StateVector> {
    let basis = [code.zero_bar(), code.one_bar()];
    let mut amps = vec![c(0., 0.); 1 << 18];
    for a in 0..2 {
        for b in 0..2 {
            let w = coeffs[a + 2 * b];
            if w.norm() == 0.0 {
                continue;
            }
            for (ic, ac) in basis[a].amplitudes().iter().enumerate() {
                if ac.norm() == 0.0 {
                    continue;
                }
                for (it, at) in basis[b].amplitudes().iter().enumerate() {
                    amps[it | ic << 9] += w * ac * at;
                }
            }
        }
    }
    let bare = TwoSystemLayout::new(sys.orientation, false).layout;
    let psi = StateVector::from_amplitudes(bare, amps)?;
    psi.embed(sys.layout.clone())
}

/// Apply independent gauge elements to both systems.
pub fn apply_gauge<R: Rng + ?Sized>(code: &NestedSquaresCode, psi: &mut StateVector, rng: &mut R) -> Result<()> {
    let n = psi.n_qubits();
    let t: Vec<usize> = (0..9).collect();
    let ctl: Vec<usize> = (9..18).collect();
    psi.apply_pauli(&random_gauge(code, rng).embed(n, &t)?)?;
    psi.apply_pauli(&random_gauge(code, rng).embed(n, &ctl)?)?;
    Ok(())
}

/// Logical 4x4 density matrix of the two systems on qubits 0..18.
pub fn extract_pair(code: &NestedSquaresCode, psi: &StateVector) -> Result<CMat> {
    let n = psi.n_qubits();
    let logical = [None, Some(code.x_bar()), Some(code.y_bar()), Some(code.z_bar())];
    let mats = [identity(2), mat_x(), mat_y(), mat_z()];
    let t: Vec<usize> = (0..9).collect();
    let ctl: Vec<usize> = (9..18).collect();
    let mut rho = CMat::zeros(4, 4);
    for (ia, la) in logical.iter().enumerate() {
        for (ib, lb) in logical.iter().enumerate() {
            let mut p = PauliOperator::identity(n);
            if let Some(op) = la {
                p = p.multiply(&op.embed(n, &ctl)?)?;
            }
            if let Some(op) = lb {
                p = p.multiply(&op.embed(n, &t)?)?;
            }
            let e = psi.expectation_complex(&p)?;
            rho += kron_le(&[mats[ia].clone(), mats[ib].clone()]).scale(0.25) * e;
        }
    }
    Ok(rho)
}

#[derive(Debug, Clone, Serialize)]
pub struct GateCheck {
    pub gate: String,
    pub inputs: usize,
    pub branches: usize,
    /// Worst trace distance between the output and the ideal output.
    pub max_trace_distance: f64,
    /// Largest weight found outside the bare two-system register after the frame is undone.
    pub max_leakage: f64,
    /// Largest gap between 1 and the summed branch probabilities.
    pub probability_gap: f64,
}

impl GateCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_trace_distance <= tol && self.max_leakage <= tol && self.probability_gap <= tol
    }
}

/// Run `program` on every input (with fresh gauge noise when `rng` is given),
/// follow every measurement branch, undo the Pauli frame and compare the
/// logical output with `ideal * rho_in * ideal^dag`.
pub fn check_two_system<R: Rng + ?Sized>(
    code: &NestedSquaresCode,
    sys: &TwoSystemLayout,
    program: &Program,
    ideal: &CMat,
    inputs: &[[C64; 4]],
    mut rng: Option<&mut R>,
) -> Result<GateCheck> {
    if program.layout() != &sys.layout {
        return Err(NsqError::Layout(format!("{} runs on a different layout", program.name())));
    }
    let bare = TwoSystemLayout::new(sys.orientation, false).layout;
    let mut out = GateCheck {
        gate: program.name().to_string(),
        inputs: inputs.len(),
        branches: 0,
        max_trace_distance: 0.0,
        max_leakage: 0.0,
        probability_gap: 0.0,
    };
    for coeffs in inputs {
        let mut psi = encode_pair(code, sys, coeffs)?;
        if let Some(r) = rng.as_deref_mut() {
            apply_gauge(code, &mut psi, r)?;
        }
        let v = nalgebra::DVector::from_column_slice(coeffs);
        let want = ideal * outer(v.as_slice()) * ideal.adjoint();
        let mut total = 0.0;
        for br in program.enumerate(&psi)? {
            out.branches += 1;
            total += br.probability;
            let mut s = br.state;
            s.apply_pauli(&br.frame.adjoint())?;
            let kept = s.restrict(bare.clone())?;
            out.max_leakage = out.max_leakage.max((1.0 - kept.norm_sqr()).abs());
            let got = extract_pair(code, &kept)?;
            out.max_trace_distance = out.max_trace_distance.max(trace_distance(&got, &want));
        }
        out.probability_gap = out.probability_gap.max((1.0 - total).abs());
    }
    Ok(out)
}

/// Single-system version for gates that act on one code block. The program's
/// layout must hold the code particles; everything else must return to `|0,00>`.
pub fn check_one_system<R: Rng + ?Sized>(
    code: &NestedSquaresCode,
    program: &Program,
    ideal: &CMat,
    inputs: &[[C64; 2]],
    mut rng: Option<&mut R>,
) -> Result<GateCheck> {
    let bare: RegisterLayout = code.layout().clone();
    let mut out = GateCheck {
        gate: program.name().to_string(),
        inputs: inputs.len(),
        branches: 0,
        max_trace_distance: 0.0,
        max_leakage: 0.0,
        probability_gap: 0.0,
    };
    for [alpha, beta] in inputs {
        let mut psi = code.logical_state(*alpha, *beta)?;
        if let Some(r) = rng.as_deref_mut() {
            psi.apply_pauli(&random_gauge(code, r))?;
        }
        let psi = psi.embed(program.layout().clone())?;
        let want = ideal * outer(&[*alpha, *beta]) * ideal.adjoint();
        let mut total = 0.0;
        for br in program.enumerate(&psi)? {
            out.branches += 1;
            total += br.probability;
            let mut s = br.state;
            s.apply_pauli(&br.frame.adjoint())?;
            let kept = s.restrict(bare.clone())?;
            out.max_leakage = out.max_leakage.max((1.0 - kept.norm_sqr()).abs());
            let got = code.extract_logical_pure(&kept)?;
            out.max_trace_distance = out.max_trace_distance.max(trace_distance(&got, &want));
        }
        out.probability_gap = out.probability_gap.max((1.0 - total).abs());
    }
    Ok(out)
}

/// Inputs that pin down a 4x4 unitary up to phase: the basis, superpositions
/// of pairs, and a few states with relative phases.
pub fn pair_inputs() -> Vec<[C64; 4]> {
    let z = c(0., 0.);
    let o = c(1., 0.);
    let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.);
    let hi = c(0., std::f64::consts::FRAC_1_SQRT_2);
    let q = c(0.5, 0.);
    vec![
        [o, z, z, z],
        [z, o, z, z],
        [z, z, o, z],
        [z, z, z, o],
        [h, h, z, z],
        [h, z, hi, z],
        [z, h, z, -h],
        [q, c(0., 0.5), -q, c(0., -0.5)],
        [q, q, q, q],
    ]
}

pub fn single_inputs() -> Vec<[C64; 2]> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        [c(1., 0.), c(0., 0.)],
        [c(0., 0.), c(1., 0.)],
        [c(r, 0.), c(r, 0.)],
        [c(r, 0.), c(0., r)],
        [c(0.6, 0.), c(0., -0.8)],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn cz_matches_the_z_controlled_form() {
        let i = identity(2);
        let (x, z) = (mat_x(), mat_z());
        let alt = kron_le(&[i.clone(), (&i + &z).scale(0.5)]) + kron_le(&[x, (&i - &z).scale(0.5)]);
        assert!(max_abs_diff(&alt, &ideal_cz()) < 1e-12);
    }

    #[test]
    fn cx_with_minus_control_flips_target() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // control |->, target |0>, ordered kron_le([ctrl, tgt])
        let v = nalgebra::DVector::from_vec(vec![c(r, 0.), c(-r, 0.), c(0., 0.), c(0., 0.)]);
        let out = ideal_cx() * v;
        assert!((out[2].re - r).abs() < 1e-12 && (out[3].re + r).abs() < 1e-12);
    }
}
