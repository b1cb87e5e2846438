//! The nested-squares code: stabilizers, logical and gauge operators, logical
//! states, syndrome projectors, recovery table and error classification.

mod frame;
mod syndrome;

pub use frame::SubsystemFrame;
pub use syndrome::Syndrome;

use serde::Serialize;

use crate::engine::{DensityMatrix, Projector, StateVector};
use crate::error::{NsqError, Result};
use crate::layout::{RegisterLayout, Slot};
use crate::linalg::{c, CMat};
use crate::pauli::{format_pauli, parse_pauli, Decomposition, Letter, PauliGroup, PauliOperator};
use crate::C64;

pub const N_QUBITS: usize = 9;

/// Table rows in the code's text notation.
pub const STABILIZER_TEXT: [&str; 6] = [
    "+Zc.Zx.Iy@P0 * Zc.Zx.Iy@P2",
    "+Zc.Zx.Iy@P2 * Zc.Zx.Iy@P4",
    "+Zc.Ix.Zy@P0 * Zc.Ix.Zy@P2",
    "+Zc.Ix.Zy@P2 * Zc.Ix.Zy@P4",
    "+Xc.Xx.Xy@P0 * Xc.Xx.Xy@P2",
    "+Xc.Xx.Xy@P2 * Xc.Xx.Xy@P4",
];
pub const Z_BAR_TEXT: &str = "+Zc.Zx.Zy@P0 * Zc.Zx.Zy@P2 * Zc.Zx.Zy@P4";
pub const X_BAR_TEXT: &str = "+Xc.Xx.Xy@P4";
pub const GAUGE_Z_TEXT: [&str; 2] = [
    "+Zc.Zx.Iy@P0 * Zc.Zx.Iy@P2 * Zc.Zx.Iy@P4",
    "+Zc.Ix.Zy@P0 * Zc.Ix.Zy@P2 * Zc.Ix.Zy@P4",
];
pub const GAUGE_X_TEXT: [&str; 2] = [
    "+Xc.Ix.Xy@P0 * Xc.Ix.Xy@P2 * Xc.Ix.Xy@P4",
    "+Xc.Xx.Iy@P0 * Xc.Xx.Iy@P2 * Xc.Xx.Iy@P4",
];

/// Logical part of a Pauli error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LogicalPart {
    I,
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorClass {
    pub syndrome: Syndrome,
    pub logical: LogicalPart,
    /// Decomposition of `p * sigma_m^dag` over the gauge generators when the logical part is I.
    pub gauge_witness: Option<Decomposition>,
}

#[derive(Debug, Clone)]
pub struct NestedSquaresCode {
    layout: RegisterLayout,
    stabilizers: [PauliOperator; 6],
    z_bar: PauliOperator,
    x_bar: PauliOperator,
    gauge_z: [PauliOperator; 2],
    gauge_x: [PauliOperator; 2],
    gauge: PauliGroup,
    zero: Vec<C64>,
    one: Vec<C64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CodeExport {
    pub layout: Vec<String>,
    pub stabilizers: Vec<(String, String)>,
    pub logical: Vec<(String, String)>,
    pub gauge: Vec<(String, String)>,
    pub recovery_z: Vec<(String, String)>,
    pub recovery_x: Vec<(String, String)>,
}

/// Recovery lookup: (m5m4 key, particle) for Z_c errors.
const SIGMA_Z: [(u8, &str); 3] = [(0b01, "P0"), (0b10, "P4"), (0b11, "P2")];

fn slot_code(s: Slot) -> u8 {
    match s {
        Slot::C => 0b01,
        Slot::X => 0b10,
        Slot::Y => 0b11,
    }
}

impl NestedSquaresCode {
    pub fn new() -> Self {
        let layout = RegisterLayout::physical();
        let p = |t: &str| parse_pauli(t, &layout).expect("static operator text");
        let stabilizers = STABILIZER_TEXT.map(p);
        let z_bar = p(Z_BAR_TEXT);
        let x_bar = p(X_BAR_TEXT);
        let gauge_z = GAUGE_Z_TEXT.map(p);
        let gauge_x = GAUGE_X_TEXT.map(p);
        let mut gens = stabilizers.to_vec();
        gens.extend([gauge_z[0], gauge_x[0], gauge_z[1], gauge_x[1]]);
        let gauge = PauliGroup::new(N_QUBITS, gens).expect("widths agree");

        // |+-bar> are the particle products; |0bar>, |1bar> their (anti)symmetric sums.
        let plus = particle_product(1.0);
        let minus = particle_product(-1.0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let zero: Vec<C64> = plus.iter().zip(&minus).map(|(a, b)| (a + b) * r).collect();
        let one: Vec<C64> = plus.iter().zip(&minus).map(|(a, b)| (a - b) * r).collect();
        NestedSquaresCode {
            layout,
            stabilizers,
            z_bar,
            x_bar,
            gauge_z,
            gauge_x,
            gauge,
            zero,
            one,
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn stabilizers(&self) -> &[PauliOperator; 6] {
        &self.stabilizers
    }

    pub fn stabilizer(&self, i: usize) -> PauliOperator {
        self.stabilizers[i]
    }

    pub fn z_bar(&self) -> PauliOperator {
        self.z_bar
    }

    pub fn x_bar(&self) -> PauliOperator {
        self.x_bar
    }

    /// `Y-bar = i X-bar Z-bar`.
    pub fn y_bar(&self) -> PauliOperator {
        self.x_bar.multiply(&self.z_bar).unwrap().times_i(1)
    }

    pub fn gauge_z(&self, k: usize) -> PauliOperator {
        self.gauge_z[k]
    }

    pub fn gauge_x(&self, k: usize) -> PauliOperator {
        self.gauge_x[k]
    }

    /// Group generated by the stabilizers and gauge transformations.
    pub fn gauge_group(&self) -> &PauliGroup {
        &self.gauge
    }

    /// A uniformly random gauge-group element (stabilizers included), Hermitian.
    pub fn random_gauge<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> PauliOperator {
        let mut g = PauliOperator::identity(N_QUBITS);
        let gens = (0..2)
            .flat_map(|k| [self.gauge_z(k), self.gauge_x(k)])
            .chain(self.stabilizers.iter().copied());
        for s in gens {
            if rng.random::<bool>() {
                g = g.multiply(&s).unwrap();
            }
        }
        g.hermitian_form()
    }

    pub fn stabilizer_group(&self) -> PauliGroup {
        PauliGroup::new(N_QUBITS, self.stabilizers.to_vec()).unwrap()
    }

    pub fn text(&self, p: &PauliOperator) -> String {
        format_pauli(p, &self.layout).expect("nine-qubit operator")
    }

    pub fn parse(&self, s: &str) -> Result<PauliOperator> {
        parse_pauli(s, &self.layout)
    }

    /// Z-bar eigenstate +1 with all gauge Z operators at +1.
    pub fn zero_bar(&self) -> StateVector {
        StateVector::from_amplitudes(self.layout.clone(), self.zero.clone()).unwrap()
    }

    pub fn one_bar(&self) -> StateVector {
        StateVector::from_amplitudes(self.layout.clone(), self.one.clone()).unwrap()
    }

    /// `alpha |0bar> + beta |1bar>`.
    pub fn logical_state(&self, alpha: C64, beta: C64) -> Result<StateVector> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(NsqError::InvalidState(format!("|alpha|^2 + |beta|^2 = {n}")));
        }
        let amps = self
            .zero
            .iter()
            .zip(&self.one)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        StateVector::from_amplitudes(self.layout.clone(), amps)
    }

    /// `alpha |+bar> + beta |-bar>` built from the per-particle products
    /// `(|0,00> +- |1,11>)/sqrt2`; these are the X-bar eigenstates.
    pub fn product_state(&self, alpha: C64, beta: C64) -> Result<StateVector> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(NsqError::InvalidState(format!("|alpha|^2 + |beta|^2 = {n}")));
        }
        let plus = particle_product(1.0);
        let minus = particle_product(-1.0);
        let amps = plus
            .iter()
            .zip(&minus)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        StateVector::from_amplitudes(self.layout.clone(), amps)
    }

    /// 2x2 logical density matrix from Pauli expectations:
    /// `(tr I + <X>X + <Y>Y + <Z>Z) / 2`. Agrees with the subsystem frame trace-out.
    pub fn extract_logical(&self, rho: &DensityMatrix) -> Result<CMat> {
        let t = rho.trace();
        let x = rho.expectation_complex(&self.x_bar)?;
        let y = rho.expectation_complex(&self.y_bar())?;
        let z = rho.expectation_complex(&self.z_bar)?;
        Ok(bloch_to_matrix(t, x, y, z))
    }

    /// Same as `extract_logical` for a pure state.
    pub fn extract_logical_pure(&self, psi: &StateVector) -> Result<CMat> {
        let t = C64::new(psi.norm_sqr(), 0.0);
        let x = psi.expectation_complex(&self.x_bar)?;
        let y = psi.expectation_complex(&self.y_bar())?;
        let z = psi.expectation_complex(&self.z_bar)?;
        Ok(bloch_to_matrix(t, x, y, z))
    }

    /// Engine projector for syndrome `m`.
    pub fn syndrome_projector(&self, m: Syndrome) -> Projector {
        Projector::Pauli((0..6).map(|i| (self.stabilizers[i], m.bit(i))).collect())
    }

    pub fn syndrome_projectors(&self) -> Vec<Projector> {
        Syndrome::all().map(|m| self.syndrome_projector(m)).collect()
    }

    /// Dense `P_m = prod_i (I + (-1)^{m_i} s_i) / 2`, expanded as a signed sum of
    /// the 64 stabilizer products.
    pub fn projector(&self, m: Syndrome) -> CMat {
        let d = 1usize << N_QUBITS;
        let mut p = CMat::zeros(d, d);
        for subset in 0..64usize {
            let mut op = PauliOperator::identity(N_QUBITS);
            let mut sign = 1.0 / 64.0;
            for i in 0..6 {
                if subset >> i & 1 == 1 {
                    op = op.multiply(&self.stabilizers[i]).unwrap();
                    if m.bit(i) {
                        sign = -sign;
                    }
                }
            }
            for col in 0..d {
                let (row, coef) = op.act(col);
                p[(row, col)] += coef * sign;
            }
        }
        p
    }

    /// Syndrome of a Pauli: bit i set iff it anticommutes with s_i.
    pub fn syndrome_of(&self, p: &PauliOperator) -> Result<Syndrome> {
        if p.width() != N_QUBITS {
            return Err(NsqError::WidthMismatch(p.width(), N_QUBITS));
        }
        let mut b = 0u8;
        for i in 0..6 {
            b |= (p.symplectic(&self.stabilizers[i]) as u8) << i;
        }
        Ok(Syndrome::new(b))
    }

    /// Z-error part of the recovery table.
    pub fn sigma_z(&self, m5: bool, m4: bool) -> PauliOperator {
        let key = ((m5 as u8) << 1) | m4 as u8;
        match SIGMA_Z.iter().find(|(k, _)| *k == key) {
            None => PauliOperator::identity(N_QUBITS),
            Some((_, part)) => {
                let q = self.layout.qubit(part, Slot::C).unwrap();
                PauliOperator::single(N_QUBITS, q, Letter::Z)
            }
        }
    }

    /// X-error part, keyed by the table label `t3 t2 t1 t0`. Unlisted labels are
    /// decoded as the P4 entry for `t3 t2` times the P0 entry for `t1 t0`.
    pub fn sigma_x_label(&self, label: u8) -> PauliOperator {
        let hi = label >> 2 & 3;
        let lo = label & 3;
        let on = |part: &str, code: u8| -> PauliOperator {
            if code == 0 {
                return PauliOperator::identity(N_QUBITS);
            }
            let slot = Slot::ALL.into_iter().find(|s| slot_code(*s) == code).unwrap();
            let q = self.layout.qubit(part, slot).unwrap();
            PauliOperator::single(N_QUBITS, q, Letter::X)
        };
        if hi == lo {
            return on("P2", hi);
        }
        on("P4", hi).multiply(&on("P0", lo)).unwrap()
    }

    /// Whether the table lists this X label explicitly.
    pub fn x_label_listed(label: u8) -> bool {
        let hi = label >> 2 & 3;
        let lo = label & 3;
        hi == 0 || lo == 0 || hi == lo
    }

    /// `sigma_m = sigma_X sigma_Z`, so that `sigma_m^dag = sigma_Z^dag sigma_X^dag`.
    pub fn recovery_operator(&self, m: Syndrome) -> PauliOperator {
        let (m5, m4) = m.z_part();
        let sx = self.sigma_x_label(m.table_label() & 0b1111);
        sx.multiply(&self.sigma_z(m5, m4)).unwrap()
    }

    pub fn classify_pauli(&self, p: &PauliOperator) -> Result<ErrorClass> {
        let m = self.syndrome_of(p)?;
        let r = p.multiply(&self.recovery_operator(m).adjoint())?;
        debug_assert_eq!(self.syndrome_of(&r)?, Syndrome::ZERO);
        let ax = r.symplectic(&self.x_bar) == 1;
        let az = r.symplectic(&self.z_bar) == 1;
        // anticommuting with X-bar means a Z component, and vice versa
        let logical = match (az, ax) {
            (false, false) => LogicalPart::I,
            (true, false) => LogicalPart::X,
            (false, true) => LogicalPart::Z,
            (true, true) => LogicalPart::Y,
        };
        let gauge_witness = if logical == LogicalPart::I {
            self.gauge.decompose(&r, true)?
        } else {
            None
        };
        Ok(ErrorClass {
            syndrome: m,
            logical,
            gauge_witness,
        })
    }

    pub fn export(&self) -> CodeExport {
        let t = |p: &PauliOperator| self.text(p);
        CodeExport {
            layout: self.layout.particles().iter().map(|p| p.id.clone()).collect(),
            stabilizers: (0..6).map(|i| (format!("s{i}"), t(&self.stabilizers[i]))).collect(),
            logical: vec![("Z".into(), t(&self.z_bar)), ("X".into(), t(&self.x_bar))],
            gauge: vec![
                ("Zg0".into(), t(&self.gauge_z[0])),
                ("Xg0".into(), t(&self.gauge_x[0])),
                ("Zg1".into(), t(&self.gauge_z[1])),
                ("Xg1".into(), t(&self.gauge_x[1])),
            ],
            recovery_z: [(false, true), (true, false), (true, true)]
                .iter()
                .map(|&(a, b)| (format!("{}{}", a as u8, b as u8), t(&self.sigma_z(a, b))))
                .collect(),
            recovery_x: (1..16u8)
                .filter(|l| Self::x_label_listed(*l))
                .map(|l| (format!("{l:04b}"), t(&self.sigma_x_label(l))))
                .collect(),
        }
    }
}

impl Default for NestedSquaresCode {
    fn default() -> Self {
        Self::new()
    }
}

fn bloch_to_matrix(t: C64, x: C64, y: C64, z: C64) -> CMat {
    let i = c(0.0, 1.0);
    crate::linalg::from_rows(2, &[(t + z) * 0.5, (x - i * y) * 0.5, (x + i * y) * 0.5, (t - z) * 0.5])
}

/// `prod_particles (|0,00> + sign |1,11>) / sqrt2` on nine qubits.
fn particle_product(sign: f64) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); 1 << N_QUBITS];
    let amp = 2f64.powf(-1.5);
    for combo in 0..8usize {
        let mut idx = 0usize;
        let mut s = 1.0;
        for k in 0..3 {
            if combo >> k & 1 == 1 {
                idx |= 0b111 << (3 * k);
                s *= sign;
            }
        }
        v[idx] = C64::new(amp * s, 0.0);
    }
    v
}
