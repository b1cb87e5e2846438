//! Kraus channels for single-particle noise on one code block.
//!
//! Every `(I +- Z)` factor is the normalized projector `(I +- Z)/2`. Taken
//! literally the products miss completeness by powers of two, and only the
//! normalized reading makes `|alpha_n|^2 = 1/7` work for dephasing loss.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::code::{LogicalPart, NestedSquaresCode, Syndrome, N_QUBITS};
use crate::engine::{DensityMatrix, KrausOp, StateVector};
use crate::error::{NsqError, Result};
use crate::layout::RegisterLayout;
use crate::linalg::{c, from_rows, hermitian_eigenvalues, identity, kron_le, proj, spectral_norm, CMat};
use crate::pauli::{format_pauli, i_pow, PauliOperator};
use crate::C64;

/// Completeness tolerance used by every builder.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Pauli coefficients below this are dropped from expansions.
pub const TERM_CUTOFF: f64 = 1e-12;

/// 2x2 matrix in row-major order, entries as `[re, im]`.
pub type Mat2 = Vec<[f64; 2]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliTerm {
    pub coef: [f64; 2],
    /// Text form on the code register, e.g. `+Zc.Ix.Iy@P0`.
    pub op: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    Unified { elements: Vec<Vec<PauliTerm>> },
    /// Map `n` acts on the spin at position `(x, y) = (bit 1, bit 0)` of `n`.
    Spin { particle: String, maps: Vec<Mat2> },
    /// Bit 2 of `n` picks the x or y branch, bit 1 the spin projector and bit 0
    /// the projector on the other position slot.
    Position { particle: String, maps: Vec<Mat2> },
    DephasingLoss { particle: String, alphas: Vec<[f64; 2]> },
    DephasingVanish { particle: String },
    CorrectablePauliMixture { seed: u64, k: usize },
}

impl NoiseSpec {
    pub fn family(&self) -> &'static str {
        match self {
            NoiseSpec::Unified { .. } => "unified",
            NoiseSpec::Spin { .. } => "spin",
            NoiseSpec::Position { .. } => "position",
            NoiseSpec::DephasingLoss { .. } => "dephasing_loss",
            NoiseSpec::DephasingVanish { .. } => "dephasing_vanish",
            NoiseSpec::CorrectablePauliMixture { .. } => "correctable_pauli_mixture",
        }
    }
}

pub fn to_mat2(m: &CMat) -> Mat2 {
    let mut out = Vec::with_capacity(4);
    for r in 0..2 {
        for col in 0..2 {
            out.push([m[(r, col)].re, m[(r, col)].im]);
        }
    }
    out
}

pub fn from_mat2(m: &Mat2) -> Result<CMat> {
    if m.len() != 4 {
        return Err(NsqError::Parse(format!("2x2 map needs 4 entries, got {}", m.len())));
    }
    let e: Vec<C64> = m.iter().map(|z| c(z[0], z[1])).collect();
    Ok(from_rows(2, &e))
}

/// Canonical Pauli expansion: key `(x, z)` stands for `X^x Z^z` with no phase.
type Terms = BTreeMap<(u64, u64), C64>;

fn add_term(t: &mut Terms, coef: C64, p: &PauliOperator) {
    *t.entry((p.xmask(), p.zmask())).or_insert(c(0., 0.)) += coef * i_pow(p.phase());
}

fn canonical(width: usize, key: (u64, u64)) -> PauliOperator {
    PauliOperator::from_parts(width, 0, key.0, key.1).expect("key fits the register")
}

/// `m = sum_P coef_P P` over all Paulis on `log2(dim)` qubits.
pub fn pauli_expand(m: &CMat) -> Vec<(C64, PauliOperator)> {
    let d = m.nrows();
    let k = d.trailing_zeros() as usize;
    let mut out = Vec::new();
    for x in 0..d as u64 {
        for z in 0..d as u64 {
            let p = PauliOperator::from_parts(k, 0, x, z).unwrap();
            let mut tr = c(0., 0.);
            for i in 0..d {
                let (j, ph) = p.act(i);
                tr += ph.conj() * m[(j, i)];
            }
            let coef = tr / d as f64;
            if coef.norm() > TERM_CUTOFF {
                out.push((coef, p));
            }
        }
    }
    out
}

fn terms_matrix(t: &Terms, width: usize) -> Result<CMat> {
    let support = t.keys().fold(0u64, |a, (x, z)| a | x | z);
    let qubits: Vec<usize> = (0..width).filter(|q| support >> q & 1 == 1).collect();
    let d = 1usize << qubits.len();
    let mut m = CMat::zeros(d, d);
    for (key, coef) in t {
        m += canonical(width, *key).restrict(&qubits).dense_matrix()? * *coef;
    }
    Ok(m)
}

#[derive(Debug, Clone)]
pub struct KrausChannel {
    layout: RegisterLayout,
    targets: Vec<usize>,
    elements: Vec<KrausOp>,
    spec: NoiseSpec,
}

#[derive(Debug, Clone, Serialize)]
pub struct ElementVerdict {
    pub index: usize,
    pub terms: usize,
    pub correctable: bool,
    /// First term whose logical part is not I.
    pub offending: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub family: String,
    pub completeness_residual: f64,
    pub choi_min_eigenvalue: f64,
    pub elements: Vec<ElementVerdict>,
    pub correctable: bool,
}

impl ValidationReport {
    pub fn is_cptp(&self) -> bool {
        self.completeness_residual < COMPLETENESS_TOL && self.choi_min_eigenvalue > -COMPLETENESS_TOL
    }
}

impl KrausChannel {
    pub fn from_spec(code: &NestedSquaresCode, spec: &NoiseSpec) -> Result<Self> {
        match spec {
            NoiseSpec::Unified { elements } => {
                let mut parsed = Vec::with_capacity(elements.len());
                for el in elements {
                    let terms = el
                        .iter()
                        .map(|t| Ok((c(t.coef[0], t.coef[1]), code.parse(&t.op)?)))
                        .collect::<Result<Vec<_>>>()?;
                    parsed.push(terms);
                }
                unified(code, parsed)
            }
            NoiseSpec::Spin { particle, maps } => {
                build_spin_noise(code, particle, &maps.iter().map(from_mat2).collect::<Result<Vec<_>>>()?)
            }
            NoiseSpec::Position { particle, maps } => {
                build_position_noise(code, particle, &maps.iter().map(from_mat2).collect::<Result<Vec<_>>>()?)
            }
            NoiseSpec::DephasingLoss { particle, alphas } => {
                let a: Vec<C64> = alphas.iter().map(|z| c(z[0], z[1])).collect();
                build_dephasing_loss(code, particle, &a)
            }
            NoiseSpec::DephasingVanish { particle } => build_dephasing_vanish(code, particle),
            NoiseSpec::CorrectablePauliMixture { seed, k } => build_correctable_mixture(code, *seed, *k),
        }
    }

    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn elements(&self) -> &[KrausOp] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Each element expanded over `X^x Z^z` on the nine code qubits.
    pub fn pauli_terms(&self) -> Vec<Vec<(C64, PauliOperator)>> {
        self.term_maps()
            .into_iter()
            .map(|t| t.into_iter().map(|(k, v)| (v, canonical(N_QUBITS, k))).collect())
            .collect()
    }

    fn term_maps(&self) -> Vec<Terms> {
        self.elements
            .iter()
            .map(|e| {
                let mut t = Terms::new();
                match e {
                    KrausOp::Dense { targets, matrix } => {
                        for (coef, p) in pauli_expand(matrix) {
                            add_term(&mut t, coef, &p.embed(N_QUBITS, targets).unwrap());
                        }
                    }
                    KrausOp::Pauli { coef, op } => add_term(&mut t, *coef, op),
                    KrausOp::PauliSum(terms) => terms.iter().for_each(|(coef, p)| add_term(&mut t, *coef, p)),
                }
                t.retain(|_, v| v.norm() > TERM_CUTOFF);
                t
            })
            .collect()
    }

    /// `|| sum E^dag E - I ||` in the spectral norm.
    pub fn completeness_residual(&self) -> Result<f64> {
        let mut s = Terms::new();
        for t in self.term_maps() {
            for (ka, ca) in &t {
                let pa = canonical(N_QUBITS, *ka).adjoint();
                for (kb, cb) in &t {
                    let p = pa.multiply(&canonical(N_QUBITS, *kb))?;
                    add_term(&mut s, ca.conj() * cb, &p);
                }
            }
        }
        add_term(&mut s, c(-1., 0.), &PauliOperator::identity(N_QUBITS));
        s.retain(|_, v| v.norm() > 1e-15);
        if s.is_empty() {
            return Ok(0.0);
        }
        Ok(spectral_norm(&terms_matrix(&s, N_QUBITS)?))
    }

    /// Smallest eigenvalue of the normalized Choi matrix. Its nonzero spectrum
    /// is that of the Gram matrix `tr(E_k^dag E_l) / 2^n`.
    pub fn choi_min_eigenvalue(&self) -> f64 {
        let maps = self.term_maps();
        let k = maps.len();
        let mut g = CMat::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                g[(a, b)] = maps[a]
                    .iter()
                    .filter_map(|(key, ca)| maps[b].get(key).map(|cb| ca.conj() * cb))
                    .sum();
            }
        }
        let min = hermitian_eigenvalues(&g).into_iter().fold(f64::INFINITY, f64::min);
        // the Choi matrix has dimension 4^9, so it always has a kernel here
        min.min(0.0)
    }

    pub fn validate(&self, code: &NestedSquaresCode) -> Result<ValidationReport> {
        let mut elements = Vec::new();
        for (index, t) in self.term_maps().iter().enumerate() {
            let mut offending = None;
            for key in t.keys() {
                let p = canonical(N_QUBITS, *key);
                let class = code.classify_pauli(&p)?;
                if class.logical != LogicalPart::I {
                    offending = Some(format!("{} (logical {:?})", code.text(&p.hermitian_form()), class.logical));
                    break;
                }
            }
            elements.push(ElementVerdict {
                index,
                terms: t.len(),
                correctable: offending.is_none(),
                offending,
            });
        }
        Ok(ValidationReport {
            family: self.spec.family().to_string(),
            completeness_residual: self.completeness_residual()?,
            choi_min_eigenvalue: self.choi_min_eigenvalue(),
            correctable: elements.iter().all(|e| e.correctable),
            elements,
        })
    }

    /// Elements rewritten for `layout`, matching code qubits by particle id
    /// and slot. Particles the channel does not touch may be absent.
    fn elements_on(&self, layout: &RegisterLayout) -> Result<Vec<KrausOp>> {
        let mut from = Vec::new();
        let mut to = Vec::new();
        for q in 0..N_QUBITS {
            let (id, slot) = self.layout.locate(q).ok_or(NsqError::OutOfRange(q))?;
            if layout.contains(id) {
                from.push(q);
                to.push(layout.qubit(id, slot)?);
            }
        }
        let n = layout.n_qubits();
        let mask: u64 = from.iter().map(|q| 1u64 << q).sum();
        let move_op = |p: &PauliOperator| -> Result<PauliOperator> {
            let outside = p.support() & !mask;
            if outside != 0 {
                return Err(NsqError::Layout(format!("noise touches code qubit {} missing here", outside.trailing_zeros())));
            }
            p.restrict(&from).embed(n, &to)
        };
        self.elements
            .iter()
            .map(|e| {
                Ok(match e {
                    KrausOp::Dense { targets, matrix } => KrausOp::Dense {
                        targets: targets
                            .iter()
                            .map(|q| from.iter().position(|f| f == q).map(|i| to[i]))
                            .collect::<Option<_>>()
                            .ok_or_else(|| NsqError::Layout("noise target missing from register".into()))?,
                        matrix: matrix.clone(),
                    },
                    KrausOp::Pauli { coef, op } => KrausOp::Pauli {
                        coef: *coef,
                        op: move_op(op)?,
                    },
                    KrausOp::PauliSum(terms) => KrausOp::PauliSum(
                        terms.iter().map(|(cf, p)| Ok((*cf, move_op(p)?))).collect::<Result<_>>()?,
                    ),
                })
            })
            .collect()
    }

    /// `rho <- sum_k E_k rho E_k^dag`. The register must hold the code particles.
    pub fn apply(&self, rho: &mut DensityMatrix) -> Result<()> {
        let ops = self.elements_on(rho.layout())?;
        rho.apply_operator_sum(&ops)
    }

    /// Pick one element with probability `||E_k psi||^2` and return the
    /// normalized post-noise state.
    pub fn sample<R: Rng + ?Sized>(&self, psi: &StateVector, rng: &mut R) -> Result<(usize, StateVector)> {
        let ops = self.elements_on(psi.layout())?;
        let mut outs = Vec::with_capacity(ops.len());
        for op in &ops {
            let out = match op {
                KrausOp::Dense { targets, matrix } => {
                    let mut s = psi.clone();
                    s.apply_matrix(targets, matrix)?;
                    s
                }
                KrausOp::Pauli { coef, op } => {
                    let mut s = psi.clone();
                    s.apply_pauli(op)?;
                    s.amplitudes_mut().iter_mut().for_each(|a| *a *= coef);
                    s
                }
                KrausOp::PauliSum(terms) => {
                    let mut acc = vec![c(0., 0.); psi.amplitudes().len()];
                    for (cf, p) in terms {
                        let mut s = psi.clone();
                        s.apply_pauli(p)?;
                        acc.iter_mut().zip(s.amplitudes()).for_each(|(a, b)| *a += cf * b);
                    }
                    StateVector::from_amplitudes_unnormalized(psi.layout().clone(), acc)?
                }
            };
            outs.push(out);
        }
        let weights: Vec<f64> = outs.iter().map(|s| s.norm_sqr()).collect();
        let total: f64 = weights.iter().sum();
        let mut r = rng.random::<f64>() * total;
        let mut pick = weights.len() - 1;
        for (k, w) in weights.iter().enumerate() {
            if r < *w {
                pick = k;
                break;
            }
            r -= w;
        }
        let mut s = outs.swap_remove(pick);
        s.normalize();
        Ok((pick, s))
    }

    /// Every element conjugated by `g`, as a unified channel.
    pub fn conjugated_by(&self, code: &NestedSquaresCode, g: &PauliOperator) -> Result<KrausChannel> {
        let elements = self
            .pauli_terms()
            .into_iter()
            .map(|t| {
                t.into_iter()
                    .map(|(cf, p)| {
                        let sign = if g.symplectic(&p) == 1 { -1.0 } else { 1.0 };
                        (cf * sign, p)
                    })
                    .collect()
            })
            .collect();
        unified(code, elements)
    }

    /// The same channel written as explicit Pauli sums.
    pub fn to_unified_spec(&self) -> NoiseSpec {
        unified_spec(&self.layout, &self.pauli_terms())
    }
}

fn unified_spec(layout: &RegisterLayout, elements: &[Vec<(C64, PauliOperator)>]) -> NoiseSpec {
    NoiseSpec::Unified {
        elements: elements
            .iter()
            .map(|el| {
                el.iter()
                    .map(|(cf, p)| {
                        // text carries a sign of +-1 or +-i; fold it into the coefficient
                        let h = p.hermitian_form();
                        let k = (4 + p.phase() - h.phase()) % 4;
                        let z = cf * i_pow(k);
                        PauliTerm {
                            coef: [z.re, z.im],
                            op: format_pauli(&h, layout).expect("code register"),
                        }
                    })
                    .collect()
            })
            .collect(),
    }
}

/// Arbitrary Pauli-sum elements on the code register.
pub fn unified(code: &NestedSquaresCode, elements: Vec<Vec<(C64, PauliOperator)>>) -> Result<KrausChannel> {
    let mut support = 0u64;
    let mut ops = Vec::with_capacity(elements.len());
    for el in &elements {
        for (_, p) in el {
            if p.width() != N_QUBITS {
                return Err(NsqError::WidthMismatch(p.width(), N_QUBITS));
            }
            support |= p.support();
        }
        ops.push(match el.as_slice() {
            [(coef, op)] => KrausOp::Pauli {
                coef: *coef,
                op: *op,
            },
            _ => KrausOp::PauliSum(el.clone()),
        });
    }
    Ok(KrausChannel {
        layout: code.layout().clone(),
        targets: (0..N_QUBITS).filter(|q| support >> q & 1 == 1).collect(),
        elements: ops,
        spec: unified_spec(code.layout(), &elements),
    })
}

fn particle_qubits(code: &NestedSquaresCode, particle: &str) -> Result<Vec<usize>> {
    Ok(code.layout().qubits_of(particle)?.to_vec())
}

fn dense_channel(code: &NestedSquaresCode, particle: &str, mats: Vec<CMat>, spec: NoiseSpec) -> Result<KrausChannel> {
    let targets = particle_qubits(code, particle)?;
    Ok(KrausChannel {
        layout: code.layout().clone(),
        elements: mats
            .into_iter()
            .map(|matrix| KrausOp::Dense {
                targets: targets.clone(),
                matrix,
            })
            .collect(),
        targets,
        spec,
    })
}

fn gram(mats: &[CMat], d: usize) -> CMat {
    let mut s = CMat::zeros(d, d);
    for m in mats {
        s += m.adjoint() * m;
    }
    s - identity(d)
}

fn check_2x2(maps: &[CMat]) -> Result<()> {
    match maps.iter().find(|m| m.shape() != (2, 2)) {
        Some(m) => Err(NsqError::InvalidChannel(format!("map of shape {:?}, want 2x2", m.shape()))),
        None => Ok(()),
    }
}

/// `E_n = M_n x Pi_x(n1) x Pi_y(n0)` on one particle.
pub fn build_spin_noise(code: &NestedSquaresCode, particle: &str, maps: &[CMat]) -> Result<KrausChannel> {
    check_2x2(maps)?;
    for pos in 0..4 {
        let group: Vec<CMat> = maps.iter().enumerate().filter(|(n, _)| n & 3 == pos).map(|(_, m)| m.clone()).collect();
        let r = spectral_norm(&gram(&group, 2));
        if r > COMPLETENESS_TOL {
            return Err(NsqError::InvalidChannel(format!(
                "spin maps at position x{}y{} miss completeness by {r:.3e}",
                pos >> 1,
                pos & 1
            )));
        }
    }
    let mats = maps
        .iter()
        .enumerate()
        .map(|(n, m)| kron_le(&[m.clone(), proj(n >> 1 & 1), proj(n & 1)]))
        .collect();
    let spec = NoiseSpec::Spin {
        particle: particle.to_string(),
        maps: maps.iter().map(to_mat2).collect(),
    };
    dense_channel(code, particle, mats, spec)
}

/// Local basis index on `[c, x, y]` written as `c{}x{}y{}`.
fn basis_label(i: usize) -> String {
    format!("c{}x{}y{}", i & 1, i >> 1 & 1, i >> 2 & 1)
}

fn check_particle_completeness(mats: &[CMat], what: &str) -> Result<()> {
    let g = gram(mats, 8);
    let r = spectral_norm(&g);
    if r > COMPLETENESS_TOL {
        let worst = (0..8)
            .max_by(|&a, &b| g.row(a).norm().total_cmp(&g.row(b).norm()))
            .unwrap();
        return Err(NsqError::InvalidChannel(format!(
            "{what} miss completeness by {r:.3e}, worst on {}",
            basis_label(worst)
        )));
    }
    Ok(())
}

/// Bit 2 of `n` selects `Pi_c(n1) M Pi_y(n0)` (x branch) or `Pi_c(n1) Pi_x(n0) M` (y branch).
pub fn build_position_noise(code: &NestedSquaresCode, particle: &str, maps: &[CMat]) -> Result<KrausChannel> {
    check_2x2(maps)?;
    let mats: Vec<CMat> = maps
        .iter()
        .enumerate()
        .map(|(n, m)| {
            let (n1, n0) = (n >> 1 & 1, n & 1);
            if n >> 2 & 1 == 0 {
                kron_le(&[proj(n1), m.clone(), proj(n0)])
            } else {
                kron_le(&[proj(n1), proj(n0), m.clone()])
            }
        })
        .collect();
    for (n, m) in mats.iter().enumerate() {
        // local qubits: c = 0, x = 1, y = 2
        if pauli_expand(m).iter().any(|(_, p)| p.xmask() & 0b110 == 0b110) {
            return Err(NsqError::InvalidChannel(format!("position element {n} flips both x and y")));
        }
    }
    check_particle_completeness(&mats, "position maps")?;
    let spec = NoiseSpec::Position {
        particle: particle.to_string(),
        maps: maps.iter().map(to_mat2).collect(),
    };
    dense_channel(code, particle, mats, spec)
}

/// Rank-one projector `|c x y><c x y|` for `n = (c, x, y)` read as bits 2, 1, 0.
fn joint_projector(n: usize) -> CMat {
    kron_le(&[proj(n >> 2 & 1), proj(n >> 1 & 1), proj(n & 1)])
}

/// Equal-probability amplitudes, `|alpha_n|^2 = 1/7`.
pub fn default_loss_alphas() -> Vec<C64> {
    vec![c((1.0f64 / 7.0).sqrt(), 0.); 8]
}

/// `E_n = alpha_n (I - |n><n|)`.
pub fn build_dephasing_loss(code: &NestedSquaresCode, particle: &str, alphas: &[C64]) -> Result<KrausChannel> {
    if alphas.len() != 8 {
        return Err(NsqError::InvalidChannel(format!("dephasing loss needs 8 amplitudes, got {}", alphas.len())));
    }
    let mats: Vec<CMat> = alphas
        .iter()
        .enumerate()
        .map(|(n, a)| (identity(8) - joint_projector(n)) * *a)
        .collect();
    check_particle_completeness(&mats, "loss amplitudes")?;
    let spec = NoiseSpec::DephasingLoss {
        particle: particle.to_string(),
        alphas: alphas.iter().map(|z| [z.re, z.im]).collect(),
    };
    dense_channel(code, particle, mats, spec)
}

pub fn build_dephasing_vanish(code: &NestedSquaresCode, particle: &str) -> Result<KrausChannel> {
    let mats = (0..8).map(joint_projector).collect();
    let spec = NoiseSpec::DephasingVanish {
        particle: particle.to_string(),
    };
    dense_channel(code, particle, mats, spec)
}

/// `k` elements `sqrt(p_j) g_j sigma_{m_j}` with flat Dirichlet weights.
pub fn build_correctable_mixture(code: &NestedSquaresCode, seed: u64, k: usize) -> Result<KrausChannel> {
    if k == 0 {
        return Err(NsqError::InvalidChannel("a mixture needs at least one element".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // normalized exponentials are Dirichlet(1, ..., 1)
    let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = raw.iter().sum();
    let parts: Vec<(f64, PauliOperator, Syndrome)> = raw
        .iter()
        .map(|w| {
            let g = code.random_gauge(&mut rng);
            let m = Syndrome::new(rng.random_range(0..64));
            (w / total, g, m)
        })
        .collect();
    let mut ch = correctable_mixture_from(code, &parts)?;
    ch.spec = NoiseSpec::CorrectablePauliMixture { seed, k };
    Ok(ch)
}

/// Mixture with explicit weights, gauge elements and syndromes.
pub fn correctable_mixture_from(code: &NestedSquaresCode, parts: &[(f64, PauliOperator, Syndrome)]) -> Result<KrausChannel> {
    let total: f64 = parts.iter().map(|p| p.0).sum();
    if parts.is_empty() || (total - 1.0).abs() > COMPLETENESS_TOL || parts.iter().any(|p| p.0 < 0.0) {
        return Err(NsqError::InvalidChannel(format!("mixture weights sum to {total}")));
    }
    let elements = parts
        .iter()
        .map(|(p, g, m)| Ok(vec![(c(p.sqrt(), 0.), g.multiply(&code.recovery_operator(*m))?)]))
        .collect::<Result<Vec<_>>>()?;
    unified(code, elements)
}


/// Families drawn by [`random_channel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomFamily {
    Spin,
    Position,
    Mixture,
    Vanish,
    Loss,
}

impl RandomFamily {
    pub const ALL: [RandomFamily; 5] = [
        RandomFamily::Spin,
        RandomFamily::Position,
        RandomFamily::Mixture,
        RandomFamily::Vanish,
        RandomFamily::Loss,
    ];
}

/// Two 2x2 maps with `A^dag A + B^dag B = I`, cut from a random 4x2 isometry.
fn isometry_pair<R: Rng + ?Sized>(rng: &mut R) -> (CMat, CMat) {
    let m = CMat::from_fn(4, 2, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let q = m.qr().q();
    (q.rows(0, 2).into_owned(), q.rows(2, 2).into_owned())
}

/// A random correctable channel of the given family on a random code particle.
/// Spin maps are random isometry pairs per position; position maps split the
/// weight between the two branches at random.
pub fn random_channel<R: Rng + ?Sized>(code: &NestedSquaresCode, family: RandomFamily, rng: &mut R) -> Result<KrausChannel> {
    let particle = ["P0", "P2", "P4"][rng.random_range(0..3)];
    match family {
        RandomFamily::Spin => {
            let mut maps = vec![CMat::zeros(2, 2); 8];
            for pos in 0..4 {
                let (a, b) = isometry_pair(rng);
                maps[pos] = a;
                maps[pos + 4] = b;
            }
            build_spin_noise(code, particle, &maps)
        }
        RandomFamily::Position => {
            let t: f64 = rng.random();
            let mut maps = vec![CMat::zeros(2, 2); 16];
            for g in 0..8 {
                let w = c(if g < 4 { t.sqrt() } else { (1.0 - t).sqrt() }, 0.);
                let (a, b) = isometry_pair(rng);
                maps[g] = a * w;
                maps[g + 8] = b * w;
            }
            build_position_noise(code, particle, &maps)
        }
        RandomFamily::Mixture => build_correctable_mixture(code, rng.random(), rng.random_range(1..7)),
        RandomFamily::Vanish => build_dephasing_vanish(code, particle),
        RandomFamily::Loss => build_dephasing_loss(code, particle, &default_loss_alphas()),
    }
}
