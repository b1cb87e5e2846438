use nsq::code::{NestedSquaresCode, Syndrome};
use nsq::gates::hadamard::{hadamard_program, logical_hadamard};
use nsq::gates::cz::{logical_cz_horizontal, logical_cz_vertical};
use nsq::syndrome_circuit::SyndromeRecord;
use nsq::NsqError;
use nsq::gates::cx::{logical_cx, logical_sqrt_cx, SqrtCxVariant};
use nsq::gates::system::{Orientation, TwoSystemLayout};
use nsq::gates::verify::{check_two_system, check_one_system, encode_pair, ideal_cx, ideal_cz, pair_inputs, single_inputs};
use nsq::engine::StateVector;
use nsq::gates::verify::extract_pair;
use nsq::linalg::{kron_le, mat_h, mat_v};
use nsq::program::Program;
use nsq::schedule::GateSchedule;
use nsq::C64;
use nsq::schedule::Locality;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

#[test]
fn cx_blocks_match_their_ideals() {
    for o in Orientation::ALL {
        let s = logical_cx(o).unwrap();
        assert!(s.block_deviation().unwrap() < 1e-12, "{o:?}");
        let s = logical_sqrt_cx(o, SqrtCxVariant::Standard).unwrap();
        assert!(s.block_deviation().unwrap() < 1e-12, "{o:?}");
        let s = logical_sqrt_cx(o, SqrtCxVariant::Reduced).unwrap();
        assert!(s.block_deviation().unwrap() < 1e-12, "{o:?}");
    }
}

#[test]
fn cx_is_nearest_neighbour() {
    for o in Orientation::ALL {
        let s = logical_cx(o).unwrap();
        assert_eq!(s.check_locality().unwrap().worst(), Locality::NearestNeighbor);
    }
}

#[test]
fn cx_acts_as_logical_cx() {
    let code = NestedSquaresCode::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for o in Orientation::ALL {
        let sys = TwoSystemLayout::new(o, false);
        let p = Program::from_schedule(logical_cx(o).unwrap());
        let r = check_two_system(&code, &sys, &p, &ideal_cx(), &pair_inputs(), Some(&mut rng)).unwrap();
        assert!(r.passes(TOL), "{r:?}");
    }
}

#[test]
fn sqrt_cx_squares_to_cx() {
    let code = NestedSquaresCode::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for o in Orientation::ALL {
        let sys = TwoSystemLayout::new(o, false);
        for v in [SqrtCxVariant::Standard, SqrtCxVariant::Reduced] {
            let half = logical_sqrt_cx(o, v).unwrap();
            let mut twice = half.clone();
            twice.extend(&half).unwrap();
            let p = Program::from_schedule(twice);
            let r = check_two_system(&code, &sys, &p, &ideal_cx(), &pair_inputs(), Some(&mut rng)).unwrap();
            assert!(r.passes(TOL), "{v:?} {r:?}");
        }
    }
}

fn encoded(code: &NestedSquaresCode, sys: &TwoSystemLayout, ctrl: [C64; 2], tgt: [C64; 2]) -> StateVector {
    let coeffs = [ctrl[0] * tgt[0], ctrl[1] * tgt[0], ctrl[0] * tgt[1], ctrl[1] * tgt[1]];
    encode_pair(code, sys, &coeffs).unwrap()
}

fn run_once(s: &GateSchedule, psi: &StateVector) -> StateVector {
    let mut out = psi.clone();
    s.apply_state(&mut out).unwrap();
    out.apply_pauli(&s.residual().unwrap().adjoint()).unwrap();
    out
}

#[test]
fn single_sqrt_cx_moves_the_target_off_the_code() {
    let code = NestedSquaresCode::new();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [C64::new(r, 0.), C64::new(r, 0.)];
    let minus = [C64::new(r, 0.), C64::new(-r, 0.)];
    let tgt = [C64::new(0.6, 0.), C64::new(0., 0.8)];
    for o in Orientation::ALL {
        let sys = TwoSystemLayout::new(o, false);
        let s = logical_sqrt_cx(o, SqrtCxVariant::Standard).unwrap();

        let psi = encoded(&code, &sys, plus, tgt);
        let out = run_once(&s, &psi);
        assert!((out.inner(&psi).unwrap().norm() - 1.0).abs() < TOL);

        // control |-bar>: the target picks up V_c V_x V_y on P4
        let psi = encoded(&code, &sys, minus, tgt);
        let out = run_once(&s, &psi);
        let mut want = psi.clone();
        let p4 = sys.layout.qubits_of("P4").unwrap();
        for q in p4 {
            want.apply_matrix(&[q], &mat_v()).unwrap();
        }
        assert!((out.inner(&want).unwrap().norm() - 1.0).abs() < TOL);
        let vvv = kron_le(&[mat_v(), mat_v(), mat_v()]);
        let t: Vec<usize> = (0..9).collect();
        let n = out.n_qubits();
        let mut moved = 0;
        for st in code.stabilizers() {
            let stab = st.embed(n, &t).unwrap();
            // conjugated generator V s V^dag as a dense operator on P4
            let m = stab.restrict(&p4).dense_matrix().unwrap();
            let conj = &vvv * m * vvv.adjoint();
            let mut probe = out.clone();
            probe.apply_pauli(&stab.restrict_complement(&p4)).unwrap();
            probe.apply_matrix(&p4, &conj).unwrap();
            let phase = if stab.phase() == 2 { -1.0 } else { 1.0 };
            assert!((phase * probe.inner(&out).unwrap().re - 1.0).abs() < TOL);
            if out.expectation(&stab).unwrap() < 1.0 - TOL {
                moved += 1;
            }
        }
        assert!(moved > 0, "some stabilizer eigenvalue should change");
    }
}

#[test]
fn sqrt_cx_has_order_four() {
    let code = NestedSquaresCode::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let o = Orientation::Vertical;
    let sys = TwoSystemLayout::new(o, false);
    let half = logical_sqrt_cx(o, SqrtCxVariant::Standard).unwrap();
    let mut four = half.clone();
    for _ in 0..3 {
        four.extend(&half).unwrap();
    }
    let p = Program::from_schedule(four);
    let id = nsq::linalg::identity(4);
    let r = check_two_system(&code, &sys, &p, &id, &pair_inputs(), Some(&mut rng)).unwrap();
    assert!(r.passes(TOL), "{r:?}");
}

#[test]
fn orientations_agree() {
    let code = NestedSquaresCode::new();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let ctrl = [C64::new(0.6, 0.), C64::new(0.0, 0.8)];
    let tgt = [C64::new(r, 0.), C64::new(0., -r)];
    let mut outs = Vec::new();
    for o in Orientation::ALL {
        let sys = TwoSystemLayout::new(o, false);
        let out = run_once(&logical_cx(o).unwrap(), &encoded(&code, &sys, ctrl, tgt));
        outs.push(extract_pair(&code, &out).unwrap());
    }
    assert!(nsq::linalg::max_abs_diff(&outs[0], &outs[1]) < TOL);
}

fn clean_record() -> SyndromeRecord {
    SyndromeRecord {
        m: Syndrome::ZERO,
        stage_outcomes: [(0, 0); 3],
        timestamps: Vec::new(),
    }
}

#[test]
fn vertical_cz_needs_a_record() {
    assert!(matches!(logical_cz_vertical(None), Err(NsqError::MissingRecord)));
}

#[test]
fn vertical_cz_acts_as_logical_cz() {
    let code = NestedSquaresCode::new();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let sys = TwoSystemLayout::new(Orientation::Vertical, false);
    let s = logical_cz_vertical(Some(&clean_record())).unwrap();
    assert!(s.block_deviation().unwrap() < 1e-12);
    assert_eq!(s.check_locality().unwrap().worst(), Locality::NearestNeighbor);
    let p = Program::from_schedule(s);
    let r = check_two_system(&code, &sys, &p, &ideal_cz(), &pair_inputs(), Some(&mut rng)).unwrap();
    assert!(r.passes(TOL), "{r:?}");
}

#[test]
fn vertical_cz_undoes_recorded_z_errors() {
    let code = NestedSquaresCode::new();
    let sys = TwoSystemLayout::new(Orientation::Vertical, false);
    let ctl: Vec<usize> = sys.control_qubits();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for (m5, m4) in [(false, true), (true, false), (true, true)] {
        let err = code.sigma_z(m5, m4);
        let m = code.syndrome_of(&err).unwrap();
        assert_eq!(m.z_part(), (m5, m4));
        let record = SyndromeRecord { m, ..clean_record() };
        let s = logical_cz_vertical(Some(&record)).unwrap();
        let ctrl = [C64::new(r, 0.), C64::new(-r, 0.)];
        let tgt = [C64::new(r, 0.), C64::new(r, 0.)];
        let mut psi = encoded(&code, &sys, ctrl, tgt);
        psi.apply_pauli(&err.embed(18, &ctl).unwrap()).unwrap();
        let out = run_once(&s, &psi);
        let got = extract_pair(&code, &out).unwrap();
        // control |-bar> flips the target |+> to |->
        let want = encoded(&code, &sys, ctrl, [C64::new(r, 0.), C64::new(-r, 0.)]);
        let want = extract_pair(&code, &want).unwrap();
        assert!(nsq::linalg::trace_distance(&got, &want) < TOL, "{m5} {m4}");
    }
}

#[test]
fn horizontal_cz_acts_as_logical_cz_on_every_branch() {
    let code = NestedSquaresCode::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sys = TwoSystemLayout::new(Orientation::Horizontal, true);
    let p = logical_cz_horizontal().unwrap();
    assert_eq!(p.worst_locality().unwrap(), Locality::NextNearestNeighbor);
    for s in p.schedules() {
        assert!(s.block_deviation().unwrap() < 1e-12, "{}", s.name());
    }
    let all = pair_inputs();
    let inputs = [all[3], all[7], all[8]];
    let r = check_two_system(&code, &sys, &p, &ideal_cz(), &inputs, Some(&mut rng)).unwrap();
    assert!(r.passes(TOL), "{r:?}");
    assert!(r.branches > inputs.len(), "ancilla outcomes should branch");
}

#[test]
fn hadamard_is_logical_h_on_every_branch() {
    let code = NestedSquaresCode::new();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let p = hadamard_program().unwrap();
    assert_eq!(p.worst_locality().unwrap(), Locality::NextNearestNeighbor);
    for s in p.schedules() {
        assert!(s.block_deviation().unwrap() < 1e-12, "{}", s.name());
    }
    let r = check_one_system(&code, &p, &mat_h(), &single_inputs(), Some(&mut rng)).unwrap();
    assert!(r.passes(TOL), "{r:?}");
    assert!(r.branches >= 2 * single_inputs().len());
}

#[test]
fn hadamard_swaps_z_and_x_eigenstates() {
    let code = NestedSquaresCode::new();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let cases = [
        (code.zero_bar(), [C64::new(r, 0.), C64::new(r, 0.)]),
        (code.logical_state(C64::new(r, 0.), C64::new(r, 0.)).unwrap(), [C64::new(1., 0.), C64::new(0., 0.)]),
    ];
    for (input, want) in cases {
        for _ in 0..3 {
            let br = logical_hadamard(&input, &mut rng).unwrap();
            let mut s = br.state;
            s.apply_pauli(&br.frame.adjoint()).unwrap();
            let kept = s.restrict(code.layout().clone()).unwrap();
            let got = code.extract_logical_pure(&kept).unwrap();
            let want = nsq::linalg::outer(&want);
            assert!(nsq::linalg::trace_distance(&got, &want) < TOL);
        }
    }
}
