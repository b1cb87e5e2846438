//! Ordered particle operations with locality tags, grouped into blocks that each
//! carry the ideal operator they stand for and the Pauli they leave behind.

use serde::Serialize;

use crate::engine::{compose, conjugate_pauli, DensityMatrix, GateInfo, GateOp, StateVector};
use crate::error::{NsqError, Result};
use crate::layout::RegisterLayout;
use crate::linalg::{max_abs_diff, CMat};
use crate::pauli::PauliOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Locality {
    SingleParticle,
    NearestNeighbor,
    NextNearestNeighbor,
}

/// Which particle pairs may interact, and how far apart they are.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Adjacency {
    nearest: Vec<(String, String)>,
    next_nearest: Vec<(String, String)>,
}

impl Adjacency {
    /// Consecutive ids are nearest neighbors.
    pub fn chain(ids: &[&str]) -> Self {
        let mut a = Adjacency::default();
        for w in ids.windows(2) {
            a = a.nearest(w[0], w[1]);
        }
        a
    }

    pub fn nearest(mut self, a: &str, b: &str) -> Self {
        self.nearest.push((a.into(), b.into()));
        self
    }

    pub fn next_nearest(mut self, a: &str, b: &str) -> Self {
        self.next_nearest.push((a.into(), b.into()));
        self
    }

    pub fn merge(mut self, other: &Adjacency) -> Self {
        self.nearest.extend(other.nearest.iter().cloned());
        self.next_nearest.extend(other.next_nearest.iter().cloned());
        self
    }

    pub fn locality(&self, a: &str, b: &str) -> Option<Locality> {
        let hit = |list: &[(String, String)]| list.iter().any(|(p, q)| (p == a && q == b) || (p == b && q == a));
        if hit(&self.nearest) {
            Some(Locality::NearestNeighbor)
        } else if hit(&self.next_nearest) {
            Some(Locality::NextNearestNeighbor)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone)]
pub struct Step {
    pub gate: GateOp,
    pub actors: Vec<String>,
    pub locality: Locality,
}

/// Target operator of a block.
#[derive(Debug, Clone)]
pub enum Ideal {
    /// The block's own product of steps.
    Exact,
    Op { targets: Vec<usize>, matrix: CMat },
}

/// Steps whose product equals `residual * ideal`.
#[derive(Debug, Clone)]
pub struct Block {
    pub label: String,
    pub steps: Vec<Step>,
    pub ideal: Ideal,
    pub residual: PauliOperator,
}

#[derive(Debug, Clone)]
pub struct GateSchedule {
    name: String,
    layout: RegisterLayout,
    adjacency: Adjacency,
    max_locality: Locality,
    blocks: Vec<Block>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LocalityAudit {
    pub single_particle: usize,
    pub nearest_neighbor: usize,
    pub next_nearest_neighbor: usize,
}

impl LocalityAudit {
    pub fn worst(&self) -> Locality {
        if self.next_nearest_neighbor > 0 {
            Locality::NextNearestNeighbor
        } else if self.nearest_neighbor > 0 {
            Locality::NearestNeighbor
        } else {
            Locality::SingleParticle
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepExport {
    pub block: String,
    #[serde(flatten)]
    pub gate: GateInfo,
    pub actors: Vec<String>,
    pub locality: Locality,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleExport {
    pub name: String,
    pub layout: Vec<String>,
    pub steps: Vec<StepExport>,
}

impl GateSchedule {
    pub fn new(name: impl Into<String>, layout: RegisterLayout, adjacency: Adjacency, max_locality: Locality) -> Self {
        GateSchedule {
            name: name.into(),
            layout,
            adjacency,
            max_locality,
            blocks: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn n_qubits(&self) -> usize {
        self.layout.n_qubits()
    }

    /// Start a new block; later pushes land in it.
    pub fn block(&mut self, label: impl Into<String>) -> &mut Self {
        self.blocks.push(Block {
            label: label.into(),
            steps: Vec::new(),
            ideal: Ideal::Exact,
            residual: PauliOperator::identity(self.layout.n_qubits()),
        });
        self
    }

    /// Declare what the current block is meant to implement.
    pub fn set_ideal(&mut self, targets: Vec<usize>, matrix: CMat, residual: PauliOperator) -> Result<()> {
        let n = self.n_qubits();
        if residual.width() != n {
            return Err(NsqError::WidthMismatch(residual.width(), n));
        }
        let b = self
            .blocks
            .last_mut()
            .ok_or_else(|| NsqError::Schedule("no open block".into()))?;
        b.ideal = Ideal::Op { targets, matrix };
        b.residual = residual;
        Ok(())
    }

    /// Append a gate, tagging it by the particles it touches.
    pub fn push(&mut self, gate: GateOp) -> Result<()> {
        let mut actors: Vec<String> = Vec::new();
        for &q in &gate.targets {
            let (id, _) = self.layout.locate(q).ok_or(NsqError::OutOfRange(q))?;
            if !actors.iter().any(|a| a == id) {
                actors.push(id.to_string());
            }
        }
        let locality = match actors.len() {
            1 => Locality::SingleParticle,
            2 => self.adjacency.locality(&actors[0], &actors[1]).ok_or_else(|| {
                NsqError::Layout(format!("{} and {} are not adjacent ({})", actors[0], actors[1], gate.name))
            })?,
            _ => {
                return Err(NsqError::Layout(format!(
                    "{} touches {} particles",
                    gate.name,
                    actors.len()
                )))
            }
        };
        if locality > self.max_locality {
            return Err(NsqError::Layout(format!(
                "{} needs {:?} but the schedule allows {:?}",
                gate.name, locality, self.max_locality
            )));
        }
        if self.blocks.is_empty() {
            self.block("main");
        }
        self.blocks.last_mut().unwrap().steps.push(Step { gate, actors, locality });
        Ok(())
    }

    pub fn push_all(&mut self, gates: impl IntoIterator<Item = GateOp>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Append another schedule's blocks. Layouts must match.
    pub fn extend(&mut self, other: &GateSchedule) -> Result<()> {
        if other.layout != self.layout {
            return Err(NsqError::Layout("cannot join schedules over different layouts".into()));
        }
        for b in &other.blocks {
            for s in &b.steps {
                if s.locality > self.max_locality {
                    return Err(NsqError::Layout(format!("{} exceeds the allowed locality", s.gate.name)));
                }
            }
            self.blocks.push(b.clone());
        }
        Ok(())
    }

    pub fn steps(&self) -> impl Iterator<Item = &Step> {
        self.blocks.iter().flat_map(|b| b.steps.iter())
    }

    pub fn len(&self) -> usize {
        self.steps().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn audit(&self) -> LocalityAudit {
        let mut a = LocalityAudit {
            single_particle: 0,
            nearest_neighbor: 0,
            next_nearest_neighbor: 0,
        };
        for s in self.steps() {
            match s.locality {
                Locality::SingleParticle => a.single_particle += 1,
                Locality::NearestNeighbor => a.nearest_neighbor += 1,
                Locality::NextNearestNeighbor => a.next_nearest_neighbor += 1,
            }
        }
        a
    }

    /// Re-check every two-particle step against the adjacency map.
    pub fn check_locality(&self) -> Result<LocalityAudit> {
        for s in self.steps() {
            if s.actors.len() == 2 {
                let l = self
                    .adjacency
                    .locality(&s.actors[0], &s.actors[1])
                    .ok_or_else(|| NsqError::Layout(format!("{} is non-local", s.gate.name)))?;
                if l != s.locality || l > self.max_locality {
                    return Err(NsqError::Layout(format!("{} is mis-tagged", s.gate.name)));
                }
            }
        }
        Ok(self.audit())
    }

    pub fn apply_state(&self, psi: &mut StateVector) -> Result<()> {
        if psi.layout() != &self.layout {
            return Err(NsqError::Layout("state layout differs from schedule layout".into()));
        }
        for s in self.steps() {
            psi.apply(&s.gate)?;
        }
        Ok(())
    }

    pub fn apply_density(&self, rho: &mut DensityMatrix) -> Result<()> {
        if rho.layout() != &self.layout {
            return Err(NsqError::Layout("state layout differs from schedule layout".into()));
        }
        for s in self.steps() {
            rho.apply(&s.gate)?;
        }
        Ok(())
    }

    /// Product of all steps on the union of their targets (sorted).
    pub fn operator(&self) -> (Vec<usize>, CMat) {
        let gates: Vec<GateOp> = self.steps().map(|s| s.gate.clone()).collect();
        compose(&gates)
    }

    /// Push a pending Pauli through the schedule: after each block the pending
    /// operator becomes `residual * (ideal F ideal^dag)`.
    pub fn propagate(&self, frame: &PauliOperator) -> Result<PauliOperator> {
        let mut f = *frame;
        for b in &self.blocks {
            f = match &b.ideal {
                Ideal::Op { targets, matrix } => conjugate_pauli(targets, matrix, &f),
                Ideal::Exact => {
                    let gates: Vec<GateOp> = b.steps.iter().map(|s| s.gate.clone()).collect();
                    if gates.is_empty() {
                        Ok(f)
                    } else {
                        let (t, m) = compose(&gates);
                        conjugate_pauli(&t, &m, &f)
                    }
                }
            }
            .map_err(|e| match e {
                NsqError::NonClifford(_) => NsqError::NonClifford(format!("block {} of {}", b.label, self.name)),
                other => other,
            })?;
            f = b.residual.multiply(&f)?;
        }
        Ok(f)
    }

    /// Frame left by running the schedule from an empty frame.
    pub fn residual(&self) -> Result<PauliOperator> {
        self.propagate(&PauliOperator::identity(self.n_qubits()))
    }

    /// Largest entrywise gap between a block's steps and `residual * ideal`.
    pub fn block_deviation(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for b in &self.blocks {
            let Ideal::Op { targets, matrix } = &b.ideal else {
                continue;
            };
            let gates: Vec<GateOp> = b.steps.iter().map(|s| s.gate.clone()).collect();
            let mut all: Vec<usize> = targets.clone();
            all.extend(gates.iter().flat_map(|g| g.targets.iter().copied()));
            all.extend((0..self.n_qubits()).filter(|q| b.residual.support() >> q & 1 == 1));
            all.sort_unstable();
            all.dedup();
            if all.len() > 10 {
                return Err(NsqError::WidthLimit { width: all.len(), limit: 10 });
            }
            let pos = |q: usize| all.iter().position(|&t| t == q).unwrap();
            let k = all.len();
            let mut actual = crate::linalg::identity(1 << k);
            for g in &gates {
                actual = g.remap(pos).full_matrix(k)? * actual;
            }
            let ideal = GateOp::unitary("ideal", targets.iter().map(|&q| pos(q)).collect(), matrix.clone())?
                .full_matrix(k)?;
            let r = b.residual.restrict(&all).dense_matrix()?;
            worst = worst.max(max_abs_diff(&actual, &(r * ideal)));
        }
        Ok(worst)
    }

    pub fn export(&self) -> ScheduleExport {
        ScheduleExport {
            name: self.name.clone(),
            layout: self.layout.particles().iter().map(|p| p.id.clone()).collect(),
            steps: self
                .blocks
                .iter()
                .flat_map(|b| {
                    b.steps.iter().map(move |s| StepExport {
                        block: b.label.clone(),
                        gate: s.gate.info(),
                        actors: s.actors.clone(),
                        locality: s.locality,
                    })
                })
                .collect(),
        }
    }
}
