//! Schedules interleaved with spin measurements. Outcome branches are replayed
//! one at a time with forced outcomes, so memory stays at one state.

use rand::Rng;
use serde::Serialize;

use crate::engine::{conjugate_pauli, GateOp, Projector, StateVector, DEGENERATE_PROB};
use crate::error::{NsqError, Result};
use crate::gates::primitives::{h, x};
use crate::layout::{RegisterLayout, Slot};
use crate::pauli::PauliOperator;
use crate::schedule::{Adjacency, GateSchedule, Locality, LocalityAudit, ScheduleExport};

#[derive(Debug, Clone)]
pub enum Instr {
    Run(GateSchedule),
    /// Measure a spin (in the X basis if asked), then reset it to `|0>`. Outcome 1
    /// multiplies `kick` into the frame.
    Measure {
        particle: String,
        x_basis: bool,
        kick: Option<PauliOperator>,
        label: String,
    },
}

#[derive(Debug, Clone)]
pub struct Program {
    name: String,
    layout: RegisterLayout,
    instrs: Vec<Instr>,
}

#[derive(Debug, Clone)]
pub struct ProgramBranch {
    pub outcomes: Vec<u8>,
    pub probability: f64,
    pub state: StateVector,
    /// Pending operator: the state equals `frame * (ideal output)`.
    pub frame: PauliOperator,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstrExport {
    Schedule(ScheduleExport),
    Measure { particle: String, basis: &'static str, label: String },
}

impl Program {
    pub fn new(name: impl Into<String>, layout: RegisterLayout) -> Self {
        Program {
            name: name.into(),
            layout,
            instrs: Vec::new(),
        }
    }

    /// Program that just runs `s`.
    pub fn from_schedule(s: GateSchedule) -> Self {
        Program {
            name: s.name().to_string(),
            layout: s.layout().clone(),
            instrs: vec![Instr::Run(s)],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn instrs(&self) -> &[Instr] {
        &self.instrs
    }

    pub fn run_schedule(&mut self, s: GateSchedule) -> Result<()> {
        if s.layout() != &self.layout {
            return Err(NsqError::Layout(format!("{} has a different layout", s.name())));
        }
        self.instrs.push(Instr::Run(s));
        Ok(())
    }

    pub fn measure(&mut self, particle: &str, x_basis: bool, kick: Option<PauliOperator>, label: &str) -> Result<()> {
        self.layout.position(particle)?;
        self.instrs.push(Instr::Measure {
            particle: particle.into(),
            x_basis,
            kick,
            label: label.into(),
        });
        Ok(())
    }

    pub fn n_measurements(&self) -> usize {
        self.instrs.iter().filter(|i| matches!(i, Instr::Measure { .. })).count()
    }

    pub fn schedules(&self) -> impl Iterator<Item = &GateSchedule> {
        self.instrs.iter().filter_map(|i| match i {
            Instr::Run(s) => Some(s),
            _ => None,
        })
    }

    pub fn audit(&self) -> Result<LocalityAudit> {
        let mut total = LocalityAudit {
            single_particle: 0,
            nearest_neighbor: 0,
            next_nearest_neighbor: 0,
        };
        for s in self.schedules() {
            let a = s.check_locality()?;
            total.single_particle += a.single_particle;
            total.nearest_neighbor += a.nearest_neighbor;
            total.next_nearest_neighbor += a.next_nearest_neighbor;
        }
        Ok(total)
    }

    pub fn worst_locality(&self) -> Result<Locality> {
        Ok(self.audit()?.worst())
    }

    /// Replay with the given outcomes. `None` when the branch has negligible weight.
    pub fn run_forced(&self, state: &StateVector, outcomes: &[u8]) -> Result<Option<ProgramBranch>> {
        if outcomes.len() != self.n_measurements() {
            return Err(NsqError::Schedule(format!(
                "{} needs {} outcomes, got {}",
                self.name,
                self.n_measurements(),
                outcomes.len()
            )));
        }
        let mut psi = state.clone();
        let mut frame = PauliOperator::identity(self.layout.n_qubits());
        let mut prob = psi.norm_sqr();
        let mut k = 0;
        for instr in &self.instrs {
            match instr {
                Instr::Run(s) => {
                    s.apply_state(&mut psi)?;
                    frame = s.propagate(&frame)?;
                }
                Instr::Measure { particle, x_basis, kick, .. } => {
                    let o = outcomes[k];
                    k += 1;
                    let step = self.measure_step(&mut psi, &mut frame, particle, *x_basis, o)?;
                    prob *= step;
                    if prob < DEGENERATE_PROB {
                        return Ok(None);
                    }
                    if o == 1 {
                        if let Some(kp) = kick {
                            frame = kp.multiply(&frame)?;
                        }
                    }
                }
            }
        }
        Ok(Some(ProgramBranch {
            outcomes: outcomes.to_vec(),
            probability: prob,
            state: psi,
            frame,
        }))
    }

    /// Returns the conditional probability of outcome `o`.
    fn measure_step(
        &self,
        psi: &mut StateVector,
        frame: &mut PauliOperator,
        particle: &str,
        x_basis: bool,
        o: u8,
    ) -> Result<f64> {
        let q = self.layout.qubit(particle, Slot::C)?;
        if x_basis {
            let g: GateOp = h(&self.layout, particle, Slot::C)?;
            psi.apply(&g)?;
            *frame = conjugate_pauli(&g.targets, &g.matrix(), frame)?;
        }
        let qs = self.layout.qubits_of(particle)?;
        if qs.iter().any(|&b| frame.support() >> b & 1 == 1) {
            return Err(NsqError::Schedule(format!("frame acts on measured particle {particle}")));
        }
        let before = psi.norm_sqr();
        Projector::qubit(q, o as usize).apply_state(psi)?;
        let after = psi.norm_sqr();
        if after <= 0.0 {
            return Ok(0.0);
        }
        psi.normalize();
        if o == 1 {
            psi.apply(&x(&self.layout, particle, Slot::C)?)?;
        }
        Ok(after / before)
    }

    /// Every outcome sequence with non-negligible weight.
    pub fn enumerate(&self, state: &StateVector) -> Result<Vec<ProgramBranch>> {
        let k = self.n_measurements();
        let mut out = Vec::new();
        for bits in 0..1usize << k {
            let outcomes: Vec<u8> = (0..k).map(|i| (bits >> i & 1) as u8).collect();
            if let Some(b) = self.run_forced(state, &outcomes)? {
                out.push(b);
            }
        }
        Ok(out)
    }

    /// One sampled run.
    pub fn run<R: Rng + ?Sized>(&self, state: &StateVector, rng: &mut R) -> Result<ProgramBranch> {
        let mut psi = state.clone();
        let mut frame = PauliOperator::identity(self.layout.n_qubits());
        let mut outcomes = Vec::new();
        let mut prob = 1.0;
        for instr in &self.instrs {
            match instr {
                Instr::Run(s) => {
                    s.apply_state(&mut psi)?;
                    frame = s.propagate(&frame)?;
                }
                Instr::Measure { particle, x_basis, kick, .. } => {
                    let mut trial = psi.clone();
                    let mut f0 = frame;
                    let p0 = self.measure_step(&mut trial, &mut f0, particle, *x_basis, 0)?;
                    let o = if rng.random::<f64>() < p0 { 0 } else { 1 };
                    if o == 0 {
                        psi = trial;
                        frame = f0;
                        prob *= p0;
                    } else {
                        prob *= self.measure_step(&mut psi, &mut frame, particle, *x_basis, 1)?;
                        if let Some(kp) = kick {
                            frame = kp.multiply(&frame)?;
                        }
                    }
                    outcomes.push(o);
                }
            }
        }
        Ok(ProgramBranch {
            outcomes,
            probability: prob,
            state: psi,
            frame,
        })
    }

    pub fn export(&self) -> Vec<InstrExport> {
        self.instrs
            .iter()
            .map(|i| match i {
                Instr::Run(s) => InstrExport::Schedule(s.export()),
                Instr::Measure {
                    particle,
                    x_basis,
                    label,
                    ..
                } => InstrExport::Measure {
                    particle: particle.clone(),
                    basis: if *x_basis { "x" } else { "z" },
                    label: label.clone(),
                },
            })
            .collect()
    }
}

/// Builds a program as gate segments split by measurements.
pub struct ProgramBuilder {
    prog: Program,
    adjacency: Adjacency,
    max_locality: Locality,
    cur: GateSchedule,
    segments: usize,
}

impl ProgramBuilder {
    pub fn new(name: &str, layout: RegisterLayout, adjacency: Adjacency, max_locality: Locality) -> Self {
        let cur = GateSchedule::new(format!("{name}/0"), layout.clone(), adjacency.clone(), max_locality);
        ProgramBuilder {
            prog: Program::new(name, layout),
            adjacency,
            max_locality,
            cur,
            segments: 0,
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.prog.layout
    }

    /// Current gate segment.
    pub fn gates(&mut self) -> &mut GateSchedule {
        &mut self.cur
    }

    fn flush(&mut self) -> Result<()> {
        self.segments += 1;
        let fresh = GateSchedule::new(
            format!("{}/{}", self.prog.name, self.segments),
            self.prog.layout.clone(),
            self.adjacency.clone(),
            self.max_locality,
        );
        let done = std::mem::replace(&mut self.cur, fresh);
        if !done.is_empty() {
            self.prog.run_schedule(done)?;
        }
        Ok(())
    }

    pub fn measure(&mut self, particle: &str, x_basis: bool, kick: Option<PauliOperator>, label: &str) -> Result<()> {
        self.flush()?;
        self.prog.measure(particle, x_basis, kick, label)
    }

    pub fn finish(mut self) -> Result<Program> {
        self.flush()?;
        Ok(self.prog)
    }
}
