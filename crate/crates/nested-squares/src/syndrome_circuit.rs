//! Three-stage stabilizer measurement: each ancilla circles its square while
//! nearest-neighbor CNOTs copy a physical particle's eigenvalue onto its spin.

use rand::Rng;
use serde::Serialize;

use crate::code::{NestedSquaresCode, Syndrome};
use crate::engine::{Projector, StateVector, DEGENERATE_PROB};
use crate::error::{NsqError, Result};
use crate::gates::primitives::{cnot_c, h, vertex_spin, x, Vertex};
use crate::layout::{RegisterLayout, Slot};
use crate::linalg::{identity, kron_le, mat_x, mat_z, spectral_norm, CMat};
use crate::pauli::{Letter, PauliOperator};
use crate::schedule::{Adjacency, GateSchedule, Locality};

/// Which single-particle operator a submapping copies onto the ancilla.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubmapKind {
    /// `Z_c Z_x I_y`
    Zzi,
    /// `Z_c I_x Z_y`
    Ziz,
    /// `X_c X_x X_y`
    Xxx,
}

impl SubmapKind {
    pub const ALL: [SubmapKind; 3] = [SubmapKind::Zzi, SubmapKind::Ziz, SubmapKind::Xxx];

    pub fn name(self) -> &'static str {
        match self {
            SubmapKind::Zzi => "ZZI",
            SubmapKind::Ziz => "ZIZ",
            SubmapKind::Xxx => "XXX",
        }
    }

    fn letters(self) -> [Letter; 3] {
        match self {
            SubmapKind::Zzi => [Letter::Z, Letter::Z, Letter::I],
            SubmapKind::Ziz => [Letter::Z, Letter::I, Letter::Z],
            SubmapKind::Xxx => [Letter::X, Letter::X, Letter::X],
        }
    }
}

/// Form of the XXX submapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum XxxVariant {
    /// Loop alternates X_y and X_x; the closing wrapper is the inverse of the opening one.
    #[default]
    Corrected,
    /// Loop with X_y twice and the same wrapper on both sides, as usually printed.
    Printed,
}

pub fn ancilla_adjacency() -> Adjacency {
    Adjacency::chain(&["P0", "P1", "P2", "P3", "P4"])
}

/// `sum_p Pi_p(P)_{phys} (X_c)^p_{anc}` as a 64x64 matrix on `[phys c,x,y, anc c,x,y]`.
pub fn projector_form(kind: SubmapKind) -> CMat {
    let l = kind.letters();
    let p = PauliOperator::from_letters(3, &[(0, l[0]), (1, l[1]), (2, l[2])], false)
        .unwrap()
        .dense_matrix()
        .unwrap();
    let i8 = identity(8);
    let plus = (&i8 + &p) * crate::linalg::c(0.5, 0.0);
    let minus = (&i8 - &p) * crate::linalg::c(0.5, 0.0);
    let xa = kron_le(&[mat_x(), identity(2), identity(2)]);
    kron_le(&[plus, identity(8)]) + kron_le(&[minus, xa])
}

/// Gate list for one submapping on the given layout.
pub fn build_submapping(
    layout: &RegisterLayout,
    kind: SubmapKind,
    physical: &str,
    ancilla: &str,
    variant: XxxVariant,
) -> Result<GateSchedule> {
    let adjacency = ancilla_adjacency();
    if adjacency.locality(physical, ancilla) != Some(Locality::NearestNeighbor) {
        return Err(NsqError::Layout(format!("{physical} and {ancilla} are not adjacent")));
    }
    let mut s = GateSchedule::new(
        format!("{}({physical}->{ancilla})", kind.name()),
        layout.clone(),
        adjacency,
        Locality::NearestNeighbor,
    );
    s.block(format!("{}:{physical}->{ancilla}", kind.name()));
    let ph = |v: &[Vertex], u: &CMat, n: &str| vertex_spin(layout, physical, n, u, v);
    match kind {
        SubmapKind::Zzi | SubmapKind::Ziz => {
            let v: &[Vertex] = if kind == SubmapKind::Zzi { &[(1, 0), (1, 1)] } else { &[(1, 1), (0, 1)] };
            let wrap = ph(v, &mat_x(), "X")?;
            s.push(wrap.clone())?;
            for _ in 0..2 {
                s.push(cnot_c(layout, physical, ancilla)?)?;
                s.push(x(layout, ancilla, Slot::X)?)?;
                s.push(cnot_c(layout, physical, ancilla)?)?;
                s.push(x(layout, ancilla, Slot::Y)?)?;
            }
            s.push(wrap)?;
        }
        SubmapKind::Xxx => {
            let zw = ph(&[(1, 0), (0, 1)], &mat_z(), "Z")?;
            let open = |s: &mut GateSchedule| -> Result<()> {
                s.push(h(layout, physical, Slot::X)?)?;
                s.push(h(layout, physical, Slot::Y)?)?;
                s.push(zw.clone())?;
                s.push(h(layout, ancilla, Slot::C)?)
            };
            open(&mut s)?;
            let second_move = match variant {
                XxxVariant::Corrected => Slot::X,
                XxxVariant::Printed => Slot::Y,
            };
            for _ in 0..2 {
                s.push(cnot_c(layout, ancilla, physical)?)?;
                s.push(x(layout, ancilla, second_move)?)?;
                s.push(cnot_c(layout, ancilla, physical)?)?;
                s.push(x(layout, ancilla, Slot::Y)?)?;
            }
            match variant {
                XxxVariant::Printed => open(&mut s)?,
                XxxVariant::Corrected => {
                    s.push(h(layout, ancilla, Slot::C)?)?;
                    s.push(zw.clone())?;
                    s.push(h(layout, physical, Slot::X)?)?;
                    s.push(h(layout, physical, Slot::Y)?)?;
                }
            }
        }
    }
    let qp = layout.qubits_of(physical)?;
    let qa = layout.qubits_of(ancilla)?;
    let targets = vec![qp[0], qp[1], qp[2], qa[0], qa[1], qa[2]];
    s.set_ideal(targets, projector_form(kind), PauliOperator::identity(layout.n_qubits()))?;
    Ok(s)
}

/// Spectral-norm gap between a compiled submapping and its projector form,
/// on a two-particle register.
pub fn verify_identity(kind: SubmapKind, variant: XxxVariant) -> Result<f64> {
    let layout = RegisterLayout::from_ids(&[
        ("P0", crate::layout::Role::Physical),
        ("P1", crate::layout::Role::Ancillary),
    ])?;
    let s = build_submapping(&layout, kind, "P0", "P1", variant)?;
    let (targets, m) = s.operator();
    debug_assert_eq!(targets, (0..6).collect::<Vec<_>>());
    Ok(spectral_norm(&(m - projector_form(kind))))
}

/// Outcome of one round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyndromeRecord {
    pub m: Syndrome,
    /// `(P1, P3)` outcomes per stage, indexed by stage.
    pub stage_outcomes: [(u8, u8); 3],
    /// Step counter at the end of each stage, in execution order.
    pub timestamps: Vec<(usize, usize)>,
}

impl SyndromeRecord {
    /// Key under which the recovery table lists this syndrome.
    pub fn table_label(&self) -> u8 {
        self.m.table_label()
    }
}

#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub record: SyndromeRecord,
    pub probability: f64,
    pub state: StateVector,
}

/// Compiled measurement round over `[P0, P1, P2, P3, P4]`.
#[derive(Debug, Clone)]
pub struct SyndromeRound {
    layout: RegisterLayout,
    stages: Vec<GateSchedule>,
    order: Vec<usize>,
}

const STAGE_KIND: [SubmapKind; 3] = [SubmapKind::Zzi, SubmapKind::Ziz, SubmapKind::Xxx];

impl SyndromeRound {
    pub fn new() -> Result<Self> {
        Self::with_options(XxxVariant::Corrected, vec![0, 1, 2])
    }

    /// `order` lists stages by index (0: s0/s1, 1: s2/s3, 2: s4/s5).
    pub fn with_options(variant: XxxVariant, order: Vec<usize>) -> Result<Self> {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != [0, 1, 2] {
            return Err(NsqError::Schedule(format!("stage order {order:?} is not a permutation of 0..3")));
        }
        let layout = RegisterLayout::with_ancillas();
        let mut stages = Vec::new();
        for (k, kind) in STAGE_KIND.iter().enumerate() {
            let mut s = GateSchedule::new(
                format!("stage{k}"),
                layout.clone(),
                ancilla_adjacency(),
                Locality::NearestNeighbor,
            );
            for (phys, anc) in [("P0", "P1"), ("P2", "P1"), ("P2", "P3"), ("P4", "P3")] {
                s.extend(&build_submapping(&layout, *kind, phys, anc, variant)?)?;
            }
            stages.push(s);
        }
        Ok(SyndromeRound { layout, stages, order })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn stages(&self) -> &[GateSchedule] {
        &self.stages
    }

    /// Physical state with both ancillas in `|0,00>`.
    pub fn prepare(&self, physical: &StateVector) -> Result<StateVector> {
        physical.embed(self.layout.clone())
    }

    /// Physical part once the ancillas are reset.
    pub fn physical_part(&self, state: &StateVector) -> Result<StateVector> {
        state.restrict(RegisterLayout::physical())
    }

    fn check_ancillas(&self, state: &StateVector) -> Result<()> {
        if state.layout() != &self.layout {
            return Err(NsqError::Layout("round expects [P0, P1, P2, P3, P4]".into()));
        }
        let p = state.prob_reset(&["P1", "P3"])?;
        if (p - state.norm_sqr()).abs() > 1e-10 {
            return Err(NsqError::InvalidState(format!(
                "ancillas not in |0,00> (overlap {p:.3e})"
            )));
        }
        Ok(())
    }

    fn spin_projectors(&self) -> Result<Vec<Projector>> {
        let q1 = self.layout.qubit("P1", Slot::C)?;
        let q3 = self.layout.qubit("P3", Slot::C)?;
        let z = |q| PauliOperator::single(self.layout.n_qubits(), q, Letter::Z);
        Ok((0..4)
            .map(|o| Projector::Pauli(vec![(z(q1), o & 1 == 1), (z(q3), o & 2 == 2)]))
            .collect())
    }

    /// Flip each ancilla spin whose outcome was 1.
    fn reset(&self, state: &mut StateVector, o1: u8, o3: u8) -> Result<()> {
        for (id, o) in [("P1", o1), ("P3", o3)] {
            if o == 1 {
                state.apply(&x(&self.layout, id, Slot::C)?)?;
            }
        }
        Ok(())
    }

    /// All outcome branches, each with its probability and normalized post-state.
    pub fn enumerate(&self, state: &StateVector) -> Result<Vec<RoundOutcome>> {
        self.check_ancillas(state)?;
        let projectors = self.spin_projectors()?;
        let mut branches = vec![RoundOutcome {
            record: SyndromeRecord {
                m: Syndrome::ZERO,
                stage_outcomes: [(0, 0); 3],
                timestamps: Vec::new(),
            },
            probability: state.norm_sqr(),
            state: state.clone(),
        }];
        let mut clock = 0;
        for &k in &self.order {
            clock += self.stages[k].len();
            let mut next = Vec::new();
            for mut b in branches {
                self.stages[k].apply_state(&mut b.state)?;
                for (o, proj) in projectors.iter().enumerate() {
                    let mut s = b.state.clone();
                    proj.apply_state(&mut s)?;
                    let p = s.norm_sqr();
                    if p * b.probability < DEGENERATE_PROB {
                        continue;
                    }
                    s.normalize();
                    let (o1, o3) = ((o & 1) as u8, (o >> 1) as u8);
                    self.reset(&mut s, o1, o3)?;
                    let mut rec = b.record.clone();
                    rec.stage_outcomes[k] = (o1, o3);
                    rec.m = Syndrome::new(rec.m.bits() | o1 << (2 * k) | o3 << (2 * k + 1));
                    rec.timestamps.push((k, clock));
                    next.push(RoundOutcome {
                        record: rec,
                        probability: b.probability * p,
                        state: s,
                    });
                }
            }
            branches = next;
        }
        Ok(branches)
    }

    /// Sampled round.
    pub fn run<R: Rng + ?Sized>(&self, state: &StateVector, rng: &mut R) -> Result<(SyndromeRecord, StateVector)> {
        self.check_ancillas(state)?;
        let projectors = self.spin_projectors()?;
        let mut s = state.clone();
        let mut rec = SyndromeRecord {
            m: Syndrome::ZERO,
            stage_outcomes: [(0, 0); 3],
            timestamps: Vec::new(),
        };
        let mut clock = 0;
        for &k in &self.order {
            self.stages[k].apply_state(&mut s)?;
            clock += self.stages[k].len();
            let b = crate::engine::measure(&s, &projectors, rng)?;
            s = b.state;
            let (o1, o3) = ((b.outcome & 1) as u8, (b.outcome >> 1) as u8);
            self.reset(&mut s, o1, o3)?;
            rec.stage_outcomes[k] = (o1, o3);
            rec.m = Syndrome::new(rec.m.bits() | o1 << (2 * k) | o3 << (2 * k + 1));
            rec.timestamps.push((k, clock));
        }
        Ok((rec, s))
    }
}

/// Born distribution over syndromes from the code projectors, for cross-checking rounds.
pub fn born_distribution(code: &NestedSquaresCode, physical: &StateVector) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(64);
    for m in Syndrome::all() {
        let mut s = physical.clone();
        code.syndrome_projector(m).apply_state(&mut s)?;
        out.push(s.norm_sqr());
    }
    Ok(out)
}
