//! Batch driver behind the `nsq` binary: named experiments, seeded runs, CSV and
//! JSON reports. Each experiment returns a [`Report`] of pass/fail rows, and the
//! binary turns that into files and an exit code.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::code::{NestedSquaresCode, Syndrome};
use crate::engine::{DensityMatrix, StateVector};
use crate::error::{NsqError, Result};
use crate::failure;
use crate::gates::cx::{logical_cx, logical_sqrt_cx, SqrtCxVariant};
use crate::gates::cz::logical_cz;
use crate::gates::hadamard::hadamard_program;
use crate::gates::system::{Orientation, TwoSystemLayout};
use crate::gates::toffoli::toffoli_identity_check;
use crate::gates::verify::{check_one_system, check_two_system, ideal_cx, ideal_cz, pair_inputs, single_inputs, GateCheck};
use crate::linalg::{c, identity, mat_h, trace_distance, CMat};
use crate::noise::{random_channel, KrausChannel, NoiseSpec, RandomFamily};
use crate::par;
use crate::pauli::PauliOperator;
use crate::program::Program;
use crate::recovery::{correct_now, Recovery};
use crate::schedule::Locality;
use crate::syndrome_circuit::{verify_identity, SubmapKind, SyndromeRecord, SyndromeRound, XxxVariant};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    CodeAudit,
    SyndromeVerify,
    NoiseSweep,
    FrameDeferred,
    GatesVerify,
    HadamardVerify,
    ToffoliCheck,
    FailureEstimate,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::CodeAudit,
        Experiment::SyndromeVerify,
        Experiment::NoiseSweep,
        Experiment::FrameDeferred,
        Experiment::GatesVerify,
        Experiment::HadamardVerify,
        Experiment::ToffoliCheck,
        Experiment::FailureEstimate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::CodeAudit => "code-audit",
            Experiment::SyndromeVerify => "syndrome-verify",
            Experiment::NoiseSweep => "noise-sweep",
            Experiment::FrameDeferred => "frame-deferred",
            Experiment::GatesVerify => "gates-verify",
            Experiment::HadamardVerify => "hadamard-verify",
            Experiment::ToffoliCheck => "toffoli-check",
            Experiment::FailureEstimate => "failure-estimate",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn default_rounds() -> Vec<usize> {
    vec![2, 3]
}
fn default_order() -> usize {
    failure::DEFAULT_ORDER
}
fn default_points() -> usize {
    100
}
fn default_p_max() -> f64 {
    0.05
}

/// Everything but `experiment` and `seed` has a default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    /// Round counts for `frame-deferred`.
    #[serde(default = "default_rounds")]
    pub rounds: Vec<usize>,
    /// Random channels in `noise-sweep` (default 100) or sequences per round
    /// count in `frame-deferred` (default 4).
    #[serde(default)]
    pub trials: Option<usize>,
    /// Explicit channels for `noise-sweep`; replaces the random draw when non-empty.
    #[serde(default)]
    pub channels: Vec<NoiseSpec>,
    /// Families drawn from in round-robin order; all of them by default.
    #[serde(default)]
    pub families: Option<Vec<RandomFamily>>,
    /// Restrict gate checks to one orientation.
    #[serde(default)]
    pub orientation: Option<Orientation>,
    /// Replaces the default tolerance of the main checks.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Series truncation order for `failure-estimate`.
    #[serde(default = "default_order")]
    pub order: usize,
    /// Sweep points on `(0, p_max]` for `failure-estimate`.
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_p_max")]
    pub p_max: f64,
    /// Report directory; `--out` wins.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

const REQUIRED: [&str; 2] = ["experiment", "seed"];

impl ExperimentConfig {
    /// Parse a config, apply overrides and validate. An empty text counts as `{}`.
    pub fn load(text: Option<&str>, ov: &Overrides) -> Result<Self> {
        let text = text.map(str::trim).filter(|t| !t.is_empty()).unwrap_or("{}");
        let mut v: Value = serde_json::from_str(text).map_err(|e| NsqError::Config(e.to_string()))?;
        let obj = v
            .as_object_mut()
            .ok_or_else(|| NsqError::Config("top level must be a JSON object".into()))?;
        if let Some(e) = ov.experiment {
            obj.insert("experiment".into(), json!(e.name()));
        }
        if let Some(s) = ov.seed {
            obj.insert("seed".into(), json!(s));
        }
        if let Some(o) = &ov.out {
            obj.insert("out".into(), json!(o));
        }
        let missing: Vec<&str> = REQUIRED.iter().copied().filter(|k| !obj.contains_key(*k)).collect();
        if !missing.is_empty() {
            return Err(NsqError::Config(format!("missing fields: {}", missing.join(", "))));
        }
        let cfg: ExperimentConfig = serde_json::from_value(v).map_err(|e| NsqError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(NsqError::Config(m));
        if self.rounds.is_empty() || self.rounds.contains(&0) {
            return bad("rounds must be a non-empty list of positive counts".into());
        }
        if self.trials == Some(0) {
            return bad("trials must be positive".into());
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("tolerance {t} must be positive and finite"));
            }
        }
        if self.points == 0 || !(self.p_max > 0.0 && self.p_max < 0.25) {
            return bad("sweep needs points >= 1 and 0 < p_max < 0.25".into());
        }
        if self.families.as_ref().is_some_and(|f| f.is_empty()) {
            return bad("families must not be empty".into());
        }
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("nsq-out"))
    }

    fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }
}

/// One check. `pass` is `value <= tolerance`; rows kept only for the record use
/// an infinite tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub anchor: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl CheckRow {
    pub fn new(check: impl Into<String>, anchor: &str, value: f64, tolerance: f64) -> Self {
        CheckRow {
            check: check.into(),
            anchor: anchor.into(),
            value,
            tolerance,
            pass: value <= tolerance,
            detail: String::new(),
        }
    }

    /// Exact boolean check, recorded as residual 0 or 1.
    pub fn exact(check: impl Into<String>, anchor: &str, ok: bool) -> Self {
        Self::new(check, anchor, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn info(check: impl Into<String>, anchor: &str, value: f64) -> Self {
        Self::new(check, anchor, value, f64::INFINITY)
    }

    pub fn with(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: Experiment,
    pub seed: u64,
    pub rows: Vec<CheckRow>,
    /// Experiment-specific results beyond the rows.
    pub summary: Value,
    pub wall_seconds: f64,
    /// Extra files as `(name, contents)`.
    #[serde(skip)]
    pub files: Vec<(String, String)>,
    #[serde(skip)]
    pub state: Option<Value>,
}

impl Report {
    fn new(cfg: &ExperimentConfig) -> Self {
        Report {
            experiment: cfg.experiment,
            seed: cfg.seed,
            rows: Vec::new(),
            summary: Value::Null,
            wall_seconds: 0.0,
            files: Vec::new(),
            state: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckRow> {
        self.rows.iter().find(|r| !r.pass)
    }

    /// The CSV without its timestamped header line.
    pub fn csv_body(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| NsqError::Other(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| NsqError::Other(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| NsqError::Other(e.to_string()))
    }

    /// Write `<experiment>.csv`, `<experiment>.json`, any extra files and, if
    /// asked, `<experiment>_state.json`. Returns the paths written.
    pub fn write(&self, dir: &Path, dump_state: bool) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let name = self.experiment.name();
        let mut written = Vec::new();
        let mut put = |file: String, body: String| -> Result<()> {
            let p = dir.join(file);
            std::fs::write(&p, body)?;
            written.push(p);
            Ok(())
        };
        put(
            format!("{name}.csv"),
            format!("# nsq {name} seed={} unix_time={stamp}\n{}", self.seed, self.csv_body()?),
        )?;
        let json = serde_json::to_string_pretty(self).map_err(|e| NsqError::Other(e.to_string()))?;
        put(format!("{name}.json"), json + "\n")?;
        for (f, body) in &self.files {
            put(f.clone(), body.clone())?;
        }
        if dump_state {
            match &self.state {
                Some(s) => put(format!("{name}_state.json"), s.to_string() + "\n")?,
                None => log::warn!("{name} keeps no state to dump"),
            }
        }
        Ok(written)
    }
}

/// Exit code for a finished run: 0 if every check passed, 1 otherwise.
pub fn exit_code(report: &Report) -> u8 {
    if report.passed() {
        0
    } else {
        1
    }
}

/// Independent stream `k` of the run's seed.
pub fn sub_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(k);
    r
}

fn random_amplitudes<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

fn random_logical<R: Rng + ?Sized>(code: &NestedSquaresCode, rng: &mut R) -> Result<StateVector> {
    let a = random_amplitudes(rng, 2);
    code.logical_state(a[0], a[1])
}

fn mat_json(m: &CMat) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|k| [m[(r, k)].re, m[(r, k)].im]).collect())
        .collect();
    json!(rows)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let t0 = Instant::now();
    log::info!("{} seed={}", cfg.experiment, cfg.seed);
    let mut rep = match cfg.experiment {
        Experiment::CodeAudit => code_audit(cfg),
        Experiment::SyndromeVerify => syndrome_verify(cfg),
        Experiment::NoiseSweep => noise_sweep(cfg),
        Experiment::FrameDeferred => frame_deferred(cfg),
        Experiment::GatesVerify => gates_verify(cfg),
        Experiment::HadamardVerify => hadamard_verify(cfg),
        Experiment::ToffoliCheck => toffoli_check(cfg),
        Experiment::FailureEstimate => failure_estimate(cfg),
    }?;
    rep.wall_seconds = t0.elapsed().as_secs_f64();
    let passed = rep.rows.iter().filter(|r| r.pass).count();
    log::info!("{}: {passed}/{} checks pass in {:.2}s", cfg.experiment, rep.rows.len(), rep.wall_seconds);
    Ok(rep)
}

const A_STAB: &str = "stabilizer generators";
const A_LOGICAL: &str = "logical operators and gauge algebra";
const A_CODEWORDS: &str = "codeword eigenvalues";
const A_SUBMAP: &str = "syndrome submapping identities";
const A_TABLE: &str = "single-error recovery table";
const A_LOCAL: &str = "locality of shipped schedules";
const A_RESILIENCE: &str = "recovery after a correctable channel";
const A_VANISH: &str = "recovery after vanish noise";
const A_FRAME: &str = "deferred Pauli-frame correction";
const A_GATES: &str = "logical two-qubit gates";
const A_HADAMARD: &str = "teleported logical Hadamard";
const A_TOFFOLI: &str = "Toffoli from two-qubit primitives";
const A_FAILURE: &str = "failure-rate series";

pub fn code_audit(cfg: &ExperimentConfig) -> Result<Report> {
    let code = NestedSquaresCode::new();
    let mut rep = Report::new(cfg);
    let s = code.stabilizers();
    for i in 0..6 {
        for j in i + 1..6 {
            rep.rows.push(CheckRow::exact(format!("s{i} s{j} commute"), A_STAB, s[i].commutes(&s[j])?));
        }
    }
    let mut algebra: Vec<(String, PauliOperator)> = (0..6).map(|i| (format!("s{i}"), s[i])).collect();
    for k in 0..2 {
        algebra.push((format!("gauge z{k}"), code.gauge_z(k)));
        algebra.push((format!("gauge x{k}"), code.gauge_x(k)));
    }
    for (lname, l) in [("Zbar", code.z_bar()), ("Xbar", code.x_bar())] {
        for (gname, g) in &algebra {
            rep.rows.push(CheckRow::exact(format!("{lname} commutes with {gname}"), A_LOGICAL, l.commutes(g)?));
        }
    }
    rep.rows.push(CheckRow::exact(
        "Zbar Xbar anticommute",
        A_LOGICAL,
        !code.z_bar().commutes(&code.x_bar())?,
    ));
    let tol = cfg.tol(1e-12);
    for (name, psi, z) in [("|0bar>", code.zero_bar(), 1.0), ("|1bar>", code.one_bar(), -1.0)] {
        for (i, si) in s.iter().enumerate() {
            let e = psi.expectation(si)?;
            rep.rows.push(CheckRow::new(format!("<s{i}> on {name} = +1"), A_CODEWORDS, (e - 1.0).abs(), tol));
        }
        let e = psi.expectation(&code.z_bar())?;
        rep.rows.push(CheckRow::new(format!("<Zbar> on {name} = {z:+}"), A_CODEWORDS, (e - z).abs(), tol));
    }
    rep.state = Some(serde_json::to_value(code.zero_bar().dump()).map_err(|e| NsqError::Other(e.to_string()))?);
    rep.summary = serde_json::to_value(code.export()).map_err(|e| NsqError::Other(e.to_string()))?;
    Ok(rep)
}

/// Locality rows for the syndrome stages (nearest neighbour) and, if asked,
/// every gate program (next-nearest neighbour at most).
pub fn locality_rows(with_gates: bool) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let round = SyndromeRound::new()?;
    for (k, s) in round.stages().iter().enumerate() {
        let worst = s.check_locality().map(|a| a.worst());
        rows.push(
            CheckRow::exact(format!("syndrome stage {k} nearest-neighbour"), A_LOCAL, matches!(worst, Ok(w) if w <= Locality::NearestNeighbor))
                .with(format!("{worst:?}")),
        );
    }
    if with_gates {
        for (name, p) in gate_programs()? {
            let worst = p.worst_locality();
            rows.push(
                CheckRow::exact(format!("{name} within next-nearest-neighbour"), A_LOCAL, matches!(worst, Ok(w) if w <= Locality::NextNearestNeighbor))
                    .with(format!("{worst:?}")),
            );
        }
    }
    Ok(rows)
}

fn clean_record() -> SyndromeRecord {
    SyndromeRecord {
        m: Syndrome::ZERO,
        stage_outcomes: [(0, 0); 3],
        timestamps: Vec::new(),
    }
}

type GateCase = (String, Orientation, TwoSystemLayout, Program, CMat);

/// Every shipped gate program, with the layout it expects and its ideal action.
fn gate_suite(orientations: &[Orientation]) -> Result<Vec<GateCase>> {
    let mut out = Vec::new();
    for &o in orientations {
        let bare = || TwoSystemLayout::new(o, false);
        out.push((format!("cx {}", o.name()), o, bare(), Program::from_schedule(logical_cx(o)?), ideal_cx()));
        for v in [SqrtCxVariant::Standard, SqrtCxVariant::Reduced] {
            let half = logical_sqrt_cx(o, v)?;
            let mut twice = half.clone();
            twice.extend(&half)?;
            out.push((
                format!("sqrt-cx {v:?} twice {}", o.name()).to_lowercase(),
                o,
                bare(),
                Program::from_schedule(twice),
                ideal_cx(),
            ));
        }
        let cz = logical_cz(o, Some(&clean_record()))?;
        let sys = TwoSystemLayout::new(o, o == Orientation::Horizontal);
        out.push((format!("cz {}", o.name()), o, sys, cz, ideal_cz()));
    }
    Ok(out)
}

fn gate_programs() -> Result<Vec<(String, Program)>> {
    let mut v: Vec<(String, Program)> = gate_suite(&Orientation::ALL)?
        .into_iter()
        .map(|(n, _, _, p, _)| (n, p))
        .collect();
    v.push(("hadamard".into(), hadamard_program()?));
    Ok(v)
}

pub fn syndrome_verify(cfg: &ExperimentConfig) -> Result<Report> {
    let code = NestedSquaresCode::new();
    let mut rep = Report::new(cfg);
    let tol = cfg.tol(1e-10);
    for kind in SubmapKind::ALL {
        let d = verify_identity(kind, XxxVariant::Corrected)?;
        rep.rows.push(CheckRow::new(format!("{} submapping equals projector form", kind.name()), A_SUBMAP, d, tol));
    }
    let printed = verify_identity(SubmapKind::Xxx, XxxVariant::Printed)?;
    rep.rows.push(
        CheckRow::info("XXX submapping, printed loop", A_SUBMAP, printed)
            .with("spectral-norm gap of the loop as printed; kept for the record"),
    );
    rep.rows.extend(locality_rows(false)?);

    let round = SyndromeRound::new()?;
    let results = par::map_range(64, |i| -> Result<(f64, f64, usize, StateVector)> {
        let m = Syndrome::new(i as u8);
        let mut rng = sub_rng(cfg.seed, i as u64);
        let psi = random_logical(&code, &mut rng)?;
        let mut hit = psi.clone();
        hit.apply_pauli(&code.recovery_operator(m))?;
        let branches = round.enumerate(&round.prepare(&hit)?)?;
        let n = branches.len();
        let Some(b) = branches.into_iter().find(|b| b.record.m == m) else {
            return Ok((1.0, 1.0, n, psi));
        };
        let mut out = round.physical_part(&b.state)?;
        out.normalize();
        correct_now(&code, &mut out, m)?;
        let f = psi.inner(&out)?.norm_sqr();
        Ok(((1.0 - b.probability).abs(), 1.0 - f, n, out))
    });
    let mut last = None;
    for (i, r) in results.into_iter().enumerate() {
        let (dp, df, n, out) = r?;
        let m = Syndrome::new(i as u8).to_bit_string();
        rep.rows.push(CheckRow::new(format!("sigma_{m} gives syndrome {m}"), A_TABLE, dp, tol).with(format!("{n} branch(es)")));
        rep.rows.push(CheckRow::new(format!("sigma_{m} undone by correct_now"), A_TABLE, df, tol).with("1 - fidelity"));
        last = Some(out);
    }
    if let Some(s) = last {
        rep.state = Some(serde_json::to_value(s.dump()).map_err(|e| NsqError::Other(e.to_string()))?);
    }
    Ok(rep)
}

fn particle_of(spec: &NoiseSpec) -> &str {
    match spec {
        NoiseSpec::Spin { particle, .. }
        | NoiseSpec::Position { particle, .. }
        | NoiseSpec::DephasingLoss { particle, .. }
        | NoiseSpec::DephasingVanish { particle } => particle,
        _ => "-",
    }
}

fn channel_label(ch: &KrausChannel) -> String {
    format!("{} on {}", ch.spec().family(), particle_of(ch.spec()))
}

fn families(cfg: &ExperimentConfig) -> Vec<RandomFamily> {
    cfg.families.clone().unwrap_or_else(|| RandomFamily::ALL.to_vec())
}

pub fn noise_sweep(cfg: &ExperimentConfig) -> Result<Report> {
    let code = NestedSquaresCode::new();
    let rec = Recovery::new(&code)?;
    let mut rep = Report::new(cfg);
    let tol = cfg.tol(1e-9);
    let fams = families(cfg);
    let n = if cfg.channels.is_empty() { cfg.trials.unwrap_or(100) } else { cfg.channels.len() };

    let results = par::map_range(n, |i| -> Result<(String, bool, f64, CMat)> {
        let mut rng = sub_rng(cfg.seed, i as u64);
        let ch = match cfg.channels.get(i) {
            Some(spec) => KrausChannel::from_spec(&code, spec)?,
            None => random_channel(&code, fams[i % fams.len()], &mut rng)?,
        };
        let v = ch.validate(&code)?;
        let psi = random_logical(&code, &mut rng)?;
        let want = code.extract_logical_pure(&psi)?;
        let out = rec.immediate(&DensityMatrix::from_pure(&psi)?, std::slice::from_ref(&ch))?;
        let got = code.extract_logical(&out)?;
        Ok((channel_label(&ch), v.is_cptp() && v.correctable, trace_distance(&got, &want), got))
    });
    let mut last = None;
    for (i, r) in results.into_iter().enumerate() {
        let (label, valid, d, got) = r?;
        rep.rows.push(CheckRow::exact(format!("channel {i} ({label}) is CPTP and correctable"), A_RESILIENCE, valid));
        rep.rows.push(CheckRow::new(format!("channel {i} ({label}) recovered"), A_RESILIENCE, d, tol).with("logical trace distance"));
        last = Some(got);
    }

    let mut rng = sub_rng(cfg.seed, n as u64);
    let mixed = identity(8) * c(0.125, 0.);
    for p in ["P0", "P2", "P4"] {
        let ch = crate::noise::build_dephasing_vanish(&code, p)?;
        let psi = random_logical(&code, &mut rng)?;
        let mut rho = DensityMatrix::from_pure(&psi)?;
        ch.apply(&mut rho)?;
        let red = rho.partial_trace(&[p])?.to_matrix();
        let coherence = (0..8)
            .flat_map(|i| (0..8).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| red[(i, j)].norm())
            .fold(0.0, f64::max);
        rep.rows.push(CheckRow::new(format!("vanish on {p} removes every coherence"), A_VANISH, coherence, cfg.tol(1e-10)));
        // The populations survive, so a codeword particle ends at diag(1/2, 0, .., 0, 1/2).
        rep.rows.push(CheckRow::new(format!("vanish on {p} leaves I/8"), A_VANISH, trace_distance(&red, &mixed), cfg.tol(1e-10)));
        let got = code.extract_logical(&rec.recover(&rho)?)?;
        let d = trace_distance(&got, &code.extract_logical_pure(&psi)?);
        rep.rows.push(CheckRow::new(format!("vanish on {p} recovered"), A_VANISH, d, tol));
    }
    rep.state = last.map(|m| json!({ "last_logical_output": mat_json(&m) }));
    Ok(rep)
}

pub fn frame_deferred(cfg: &ExperimentConfig) -> Result<Report> {
    let code = NestedSquaresCode::new();
    let rec = Recovery::new(&code)?;
    let mut rep = Report::new(cfg);
    let tol = cfg.tol(1e-9);
    let fams = families(cfg);
    let trials = cfg.trials.unwrap_or(4);
    let jobs: Vec<(usize, usize)> = cfg.rounds.iter().flat_map(|&n| (0..trials).map(move |t| (n, t))).collect();
    let results = par::map_slice(&jobs, |&(n, t)| -> Result<(f64, f64, usize, Vec<String>)> {
        let mut rng = sub_rng(cfg.seed, ((n as u64) << 32) | t as u64);
        let psi = random_logical(&code, &mut rng)?;
        let rounds: Vec<KrausChannel> = (0..n)
            .map(|_| {
                let f = fams[rng.random_range(0..fams.len())];
                random_channel(&code, f, &mut rng)
            })
            .collect::<Result<_>>()?;
        let rho = DensityMatrix::from_pure(&psi)?;
        let now = code.extract_logical(&rec.immediate(&rho, &rounds)?)?;
        let later = rec.deferred(&rho, &rounds)?;
        let got = code.extract_logical(&later.state)?;
        let want = code.extract_logical_pure(&psi)?;
        Ok((
            trace_distance(&now, &got),
            trace_distance(&now, &want),
            later.peak_branches,
            rounds.iter().map(channel_label).collect(),
        ))
    });
    let mut runs = Vec::new();
    for (&(n, t), r) in jobs.iter().zip(results) {
        let (d, d0, peak, labels) = r?;
        rep.rows.push(
            CheckRow::new(format!("N={n} trial {t}: deferred equals immediate"), A_FRAME, d, tol)
                .with(format!("peak {peak} frame branches")),
        );
        rep.rows.push(CheckRow::new(format!("N={n} trial {t}: immediate keeps the input"), A_FRAME, d0, tol));
        runs.push(json!({ "rounds": n, "trial": t, "channels": labels, "peak_branches": peak }));
    }
    rep.summary = json!({ "runs": runs });
    Ok(rep)
}

fn pair_inputs_with_random<R: Rng + ?Sized>(rng: &mut R) -> Vec<[C64; 4]> {
    let mut v = pair_inputs();
    let r = random_amplitudes(rng, 4);
    v.push([r[0], r[1], r[2], r[3]]);
    v
}

pub fn gates_verify(cfg: &ExperimentConfig) -> Result<Report> {
    let code = NestedSquaresCode::new();
    let mut rep = Report::new(cfg);
    let tol = cfg.tol(1e-9);
    let orients: Vec<Orientation> = cfg.orientation.map_or(Orientation::ALL.to_vec(), |o| vec![o]);
    let suite = gate_suite(&orients)?;
    let results = par::map_range(suite.len(), |k| -> Result<(GateCheck, f64)> {
        let (_, _, sys, prog, ideal) = &suite[k];
        let mut rng = sub_rng(cfg.seed, k as u64);
        let inputs = pair_inputs_with_random(&mut rng);
        let t0 = Instant::now();
        let r = check_two_system(&code, sys, prog, ideal, &inputs, Some(&mut rng))?;
        Ok((r, t0.elapsed().as_secs_f64()))
    });
    let mut table = String::from("gate,orientation,trace_distance,branches\n");
    let mut timing = Vec::new();
    for ((name, o, ..), r) in suite.iter().zip(results) {
        let (g, secs) = r?;
        let mut row = CheckRow::new(format!("{name} matches its ideal"), A_GATES, g.max_trace_distance, tol).with(format!(
            "{} inputs, {} branches, leakage {:.1e}, probability gap {:.1e}",
            g.inputs, g.branches, g.max_leakage, g.probability_gap
        ));
        row.pass = g.passes(tol);
        rep.rows.push(row);
        table.push_str(&format!("{name},{},{:e},{}\n", o.name(), g.max_trace_distance, g.branches));
        timing.push(json!({ "gate": name, "orientation": o.name(), "wall_seconds": secs, "check": g }));
    }
    rep.rows.extend(locality_rows(true)?);
    rep.files.push(("gates.csv".into(), table));
    rep.summary = json!({ "gates": timing });
    Ok(rep)
}

pub fn hadamard_verify(cfg: &ExperimentConfig) -> Result<Report> {
    let code = NestedSquaresCode::new();
    let mut rep = Report::new(cfg);
    let tol = cfg.tol(1e-9);
    let p = hadamard_program()?;
    let mut rng = sub_rng(cfg.seed, 0);
    let mut inputs = single_inputs();
    let r = random_amplitudes(&mut rng, 2);
    inputs.push([r[0], r[1]]);
    let g = check_one_system(&code, &p, &mat_h(), &inputs, Some(&mut rng))?;
    let mut row = CheckRow::new("every branch gives logical H", A_HADAMARD, g.max_trace_distance, tol)
        .with(format!("{} inputs, {} branches", g.inputs, g.branches));
    row.pass = g.passes(tol);
    rep.rows.push(row);
    rep.rows.push(CheckRow::exact("both readout outcomes occur", A_HADAMARD, g.branches >= 2 * g.inputs));
    let worst = p.worst_locality();
    rep.rows.push(CheckRow::exact(
        "hadamard within next-nearest-neighbour",
        A_LOCAL,
        matches!(worst, Ok(w) if w <= Locality::NextNearestNeighbor),
    ));
    rep.summary = serde_json::to_value(&g).map_err(|e| NsqError::Other(e.to_string()))?;
    Ok(rep)
}

pub fn toffoli_check(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rep = Report::new(cfg);
    let t = toffoli_identity_check()?;
    let tol = cfg.tol(1e-12);
    rep.rows.push(CheckRow::new("circuit equals the 8x8 Toffoli", A_TOFFOLI, t.residual, tol));
    rep.rows.push(CheckRow::new("V^2 = X", A_TOFFOLI, t.v_squared_residual, tol));
    rep.rows.push(CheckRow::new("(sqrt CX)^2 = CX", A_TOFFOLI, t.sqrt_cx_squared_residual, tol));
    rep.summary = serde_json::to_value(&t).map_err(|e| NsqError::Other(e.to_string()))?;
    Ok(rep)
}

pub fn failure_estimate(cfg: &ExperimentConfig) -> Result<Report> {
    use failure::{e_common_at, e_present_at, SingleTerm};

    let mut rep = Report::new(cfg);
    let s = failure::summary(cfg.order)?;
    let exact = |name: &str, got: &str, want: i64| {
        let v: f64 = got.parse::<f64>().unwrap_or(f64::NAN);
        CheckRow::new(format!("{name} quadratic coefficient = {want}"), A_FAILURE, (v - want as f64).abs(), 0.0)
            .with(format!("exact value {got}"))
    };
    rep.rows.push(exact("common", &s.common_quadratic, 341));
    rep.rows.push(exact("present", &s.present_quadratic, 537));
    rep.rows.push(
        CheckRow::info("common, printed single-failure term", A_FAILURE, s.printed_common_quadratic.parse().unwrap_or(f64::NAN))
            .with("uses 1 - 4 p2 in the four-particle term; kept for the record"),
    );
    rep.rows.push(CheckRow::info("overhead ratio present/common", A_FAILURE, s.overhead_ratio));

    let ps: Vec<f64> = (1..=cfg.points).map(|i| cfg.p_max * i as f64 / cfg.points as f64).collect();
    let mut rising = true;
    let mut ordered = true;
    let mut last = (0.0, 0.0);
    for &p in &ps {
        let (a, b) = (e_common_at(p, SingleTerm::Exact), e_present_at(p));
        rising &= a > last.0 && b > last.1;
        ordered &= a <= b;
        last = (a, b);
    }
    rep.rows.push(CheckRow::exact("both curves increase on the sweep", A_FAILURE, rising));
    rep.rows.push(CheckRow::exact("common never above present on the sweep", A_FAILURE, ordered));

    let hi = failure::e_common(cfg.order.max(10), SingleTerm::Exact)?;
    let hp = failure::e_present(cfg.order.max(10))?;
    for p in [1e-3, 1e-4] {
        let rel = |series: f64, closed: f64| ((series - closed) / closed).abs();
        let d = rel(hi.eval(p), e_common_at(p, SingleTerm::Exact)).max(rel(hp.eval(p), e_present_at(p)));
        rep.rows.push(CheckRow::new(format!("series match closed forms at p={p:e}"), A_FAILURE, d, 1e-9));
    }

    rep.summary = serde_json::to_value(&s).map_err(|e| NsqError::Other(e.to_string()))?;
    rep.files.push(("failure_sweep.csv".into(), failure::sweep_csv(&ps)));
    rep.files.push((
        "failure_summary.json".into(),
        serde_json::to_string_pretty(&s).map_err(|e| NsqError::Other(e.to_string()))? + "\n",
    ));
    Ok(rep)
}
