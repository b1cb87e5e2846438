use nsq::code::{LogicalPart, NestedSquaresCode, Syndrome};
use nsq::engine::{DensityMatrix, StateVector};
use nsq::layout::{RegisterLayout, Role};
use nsq::linalg::{c, identity, kron_le, max_abs_diff, outer, proj, trace_distance, CMat};
use nsq::noise::*;
use nsq::pauli::PauliOperator;
use nsq::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn one_particle(id: &str) -> RegisterLayout {
    RegisterLayout::from_ids(&[(id, Role::Physical)]).unwrap()
}

fn particle_rho(amps: &[C64]) -> DensityMatrix {
    let psi = StateVector::from_amplitudes(one_particle("P0"), amps.to_vec()).unwrap();
    DensityMatrix::from_pure(&psi).unwrap()
}

fn uniform() -> Vec<C64> {
    vec![c(1.0 / 8f64.sqrt(), 0.); 8]
}

fn random_logical(code: &NestedSquaresCode, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let a = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    let b = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    DensityMatrix::from_pure(&code.logical_state(a / n, b / n).unwrap()).unwrap()
}

fn ket(v: &[f64]) -> CMat {
    let e: Vec<C64> = v.iter().map(|x| c(*x, 0.)).collect();
    CMat::from_row_slice(2, 2, &e)
}

/// Row-major `[[a, b], [c, d]]`.
fn m2(a: f64, b: f64, cc: f64, d: f64) -> CMat {
    ket(&[a, b, cc, d])
}

#[test]
fn spin_extreme_example_is_valid_and_dephases_the_spin() {
    let code = NestedSquaresCode::new();
    let mut maps = vec![proj(0); 4];
    maps.extend(vec![proj(1); 4]);
    let ch = build_spin_noise(&code, "P0", &maps).unwrap();
    let rep = ch.validate(&code).unwrap();
    assert!(rep.is_cptp() && rep.correctable);

    // spin |+>, position |00>
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![c(0., 0.); 8];
    amps[0] = c(r, 0.);
    amps[1] = c(r, 0.);
    let mut rho = particle_rho(&amps);
    ch.apply(&mut rho).unwrap();
    let spin = rho.reduced_qubits(&[0]).unwrap();
    assert!(max_abs_diff(&spin, &(identity(2) * c(0.5, 0.))) < 1e-12);
}

#[test]
fn spin_relaxation_sends_the_spin_to_zero() {
    let code = NestedSquaresCode::new();
    let mut maps = vec![proj(0); 4];
    maps.extend(vec![m2(0., 1., 0., 0.); 4]);
    let ch = build_spin_noise(&code, "P0", &maps).unwrap();
    // spin |1>, position spread over all four vertices
    let mut amps = vec![c(0., 0.); 8];
    for pos in 0..4 {
        amps[1 | pos << 1] = c(0.5, 0.);
    }
    let mut rho = particle_rho(&amps);
    ch.apply(&mut rho).unwrap();
    let spin = rho.reduced_qubits(&[0]).unwrap();
    assert!(max_abs_diff(&spin, &proj(0)) < 1e-12);
}

/// Keep `rho[i][j]` only where `i` and `j` agree on the bits in `mask`.
fn dephased(m: &CMat, mask: usize) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| if (i ^ j) & mask == 0 { m[(i, j)] } else { c(0., 0.) })
}

fn random_particle(seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<C64> = (0..8).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter().map(|a| a / n).collect()
}

#[test]
fn identity_spin_maps_only_dephase_the_position() {
    let code = NestedSquaresCode::new();
    let maps = vec![identity(2) * c(std::f64::consts::FRAC_1_SQRT_2, 0.); 8];
    let ch = build_spin_noise(&code, "P0", &maps).unwrap();
    let mut rho = particle_rho(&random_particle(3));
    let want = dephased(&rho.to_matrix(), 0b110);
    ch.apply(&mut rho).unwrap();
    assert!(max_abs_diff(&rho.to_matrix(), &want) < 1e-14);

    // a state with a definite position is left alone
    let mut amps = vec![c(0., 0.); 8];
    amps[0b100] = c(0.6, 0.);
    amps[0b101] = c(0., 0.8);
    let mut rho = particle_rho(&amps);
    let before = rho.to_matrix();
    ch.apply(&mut rho).unwrap();
    assert!(max_abs_diff(&rho.to_matrix(), &before) < 1e-14);
}

#[test]
fn mismatched_spin_maps_name_the_position() {
    let code = NestedSquaresCode::new();
    let mut maps = vec![identity(2); 3];
    maps.push(proj(0));
    let err = build_spin_noise(&code, "P0", &maps).unwrap_err().to_string();
    assert!(err.contains("x1y1"), "{err}");
}

/// Tunnelling `0 -> 1` on x works, `1 -> 0` fails.
fn localize_maps() -> Vec<CMat> {
    let zero = CMat::zeros(2, 2);
    let mut maps = Vec::new();
    for m in [m2(0., 0., 1., 0.), proj(1)] {
        maps.extend(vec![m; 4]);
        maps.extend(vec![zero.clone(); 4]);
    }
    maps
}

#[test]
fn one_way_tunnelling_localizes_in_x_one() {
    let code = NestedSquaresCode::new();
    let ch = build_position_noise(&code, "P0", &localize_maps()).unwrap();
    let rep = ch.validate(&code).unwrap();
    assert!(rep.is_cptp() && rep.correctable);
    let mut rho = particle_rho(&uniform());
    ch.apply(&mut rho).unwrap();
    let x = rho.reduced_qubits(&[1]).unwrap();
    assert!(max_abs_diff(&x, &proj(1)) < 1e-12);
}

#[test]
fn identity_position_maps_only_dephase_spin_and_y() {
    let code = NestedSquaresCode::new();
    let mut maps = vec![identity(2); 4];
    maps.extend(vec![CMat::zeros(2, 2); 4]);
    let ch = build_position_noise(&code, "P0", &maps).unwrap();
    let mut rho = particle_rho(&random_particle(4));
    let want = dephased(&rho.to_matrix(), 0b101);
    ch.apply(&mut rho).unwrap();
    assert!(max_abs_diff(&rho.to_matrix(), &want) < 1e-14);
}

#[test]
fn incomplete_position_maps_are_rejected() {
    let code = NestedSquaresCode::new();
    let maps = vec![m2(0., 0., 1., 0.); 4];
    let err = build_position_noise(&code, "P0", &maps).unwrap_err().to_string();
    assert!(err.contains("worst on c"), "{err}");
}

#[test]
fn both_axis_flip_is_not_correctable() {
    let code = NestedSquaresCode::new();
    let p = code.parse("+Ic.Xx.Xy@P0").unwrap();
    let ch = unified(&code, vec![vec![(c(1., 0.), p)]]).unwrap();
    let rep = ch.validate(&code).unwrap();
    assert!(rep.is_cptp());
    assert!(!rep.correctable);
}

#[test]
fn dephasing_loss_default_is_trace_preserving_and_correctable() {
    let code = NestedSquaresCode::new();
    let ch = build_dephasing_loss(&code, "P2", &default_loss_alphas()).unwrap();
    let rep = ch.validate(&code).unwrap();
    assert!(rep.completeness_residual < 1e-12);
    assert!(rep.is_cptp() && rep.correctable);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rho = random_logical(&code, &mut rng);
    ch.apply(&mut rho).unwrap();
    assert!((rho.trace() - c(1., 0.)).norm() < 1e-12);
}

#[test]
fn unequal_loss_amplitudes_are_rejected() {
    let code = NestedSquaresCode::new();
    let mut a = default_loss_alphas();
    a[3] = c(0.5, 0.);
    assert!(build_dephasing_loss(&code, "P0", &a).is_err());
}

#[test]
fn loss_element_is_a_scaled_identity_off_its_projector() {
    let code = NestedSquaresCode::new();
    let ch = build_dephasing_loss(&code, "P0", &default_loss_alphas()).unwrap();
    let nsq::engine::KrausOp::Dense { matrix, .. } = &ch.elements()[5] else {
        panic!("dense element expected")
    };
    // n = 5 is c=1, x=0, y=1; every other basis vector is fixed up to alpha
    let alpha = (1.0f64 / 7.0).sqrt();
    for i in 0..8 {
        let col = matrix.column(i);
        let is_n = i == (1 | 1 << 2);
        for j in 0..8 {
            let want = if i == j && !is_n { alpha } else { 0.0 };
            assert!((col[j] - c(want, 0.)).norm() < 1e-15);
        }
    }
}

fn coherence(rho: &DensityMatrix) -> f64 {
    rho.get(0, 7).norm()
}

#[test]
fn dephasing_loss_contracts_coherences_by_six_sevenths() {
    let code = NestedSquaresCode::new();
    let loss = build_dephasing_loss(&code, "P0", &default_loss_alphas()).unwrap();
    let vanish = build_dephasing_vanish(&code, "P0").unwrap();
    let mut target = particle_rho(&uniform());
    vanish.apply(&mut target).unwrap();

    let mut rho = particle_rho(&uniform());
    let mut prev = trace_distance(&rho.to_matrix(), &target.to_matrix());
    for _ in 0..10 {
        let before = coherence(&rho);
        loss.apply(&mut rho).unwrap();
        assert!((coherence(&rho) - before * 6.0 / 7.0).abs() < 1e-14);
        let d = trace_distance(&rho.to_matrix(), &target.to_matrix());
        assert!((d - prev * 6.0 / 7.0).abs() < 1e-12);
        prev = d;
    }
}

#[test]
fn seven_losses_do_not_reach_the_vanish_output() {
    let code = NestedSquaresCode::new();
    let loss = build_dephasing_loss(&code, "P0", &default_loss_alphas()).unwrap();
    let vanish = build_dephasing_vanish(&code, "P0").unwrap();
    let mut target = particle_rho(&uniform());
    vanish.apply(&mut target).unwrap();
    let mut rho = particle_rho(&uniform());
    for _ in 0..7 {
        loss.apply(&mut rho).unwrap();
    }
    let d = trace_distance(&rho.to_matrix(), &target.to_matrix());
    // 7/8 * (6/7)^7 for the uniform superposition
    assert!((d - 0.875 * (6.0f64 / 7.0).powi(7)).abs() < 1e-12);
    assert!(d > 1e-6);
}

#[test]
fn vanish_fully_mixes_a_uniform_particle() {
    let code = NestedSquaresCode::new();
    let ch = build_dephasing_vanish(&code, "P0").unwrap();
    let mut rho = particle_rho(&uniform());
    ch.apply(&mut rho).unwrap();
    assert!(max_abs_diff(&rho.to_matrix(), &(identity(8) * c(0.125, 0.))) < 1e-15);

    let mut basis = vec![c(0., 0.); 8];
    basis[0] = c(1., 0.);
    let mut rho = particle_rho(&basis);
    let before = rho.to_matrix();
    ch.apply(&mut rho).unwrap();
    assert!(max_abs_diff(&rho.to_matrix(), &before) < 1e-15);
}

#[test]
fn vanish_output_is_diagonal() {
    let code = NestedSquaresCode::new();
    let ch = build_dephasing_vanish(&code, "P0").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let amps: Vec<C64> = (0..8).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let amps: Vec<C64> = amps.iter().map(|a| a / n).collect();
    let mut rho = particle_rho(&amps);
    ch.apply(&mut rho).unwrap();
    let m = rho.to_matrix();
    let want = CMat::from_diagonal(&nalgebra::DVector::from_iterator(8, (0..8).map(|i| outer(&amps)[(i, i)])));
    assert!(max_abs_diff(&m, &want) < 1e-15);
}

#[test]
fn single_identity_mixture_is_the_identity() {
    let code = NestedSquaresCode::new();
    let ch = correctable_mixture_from(&code, &[(1.0, PauliOperator::identity(9), Syndrome::ZERO)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rho0 = random_logical(&code, &mut rng);
    let mut rho = rho0.clone();
    ch.apply(&mut rho).unwrap();
    assert!(max_abs_diff(&rho.to_matrix(), &rho0.to_matrix()) < 1e-15);
}

#[test]
fn mixture_elements_carry_their_syndromes() {
    let code = NestedSquaresCode::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let parts: Vec<_> = (0..5)
        .map(|_| (0.2, code.random_gauge(&mut rng), Syndrome::new(rng.random_range(0..64))))
        .collect();
    let ch = correctable_mixture_from(&code, &parts).unwrap();
    for (terms, (_, _, m)) in ch.pauli_terms().iter().zip(&parts) {
        assert_eq!(terms.len(), 1);
        let class = code.classify_pauli(&terms[0].1).unwrap();
        assert_eq!(class.syndrome, *m);
        assert_eq!(class.logical, LogicalPart::I);
    }
    assert!(ch.validate(&code).unwrap().is_cptp());
}

#[test]
fn logical_z_element_is_flagged() {
    let code = NestedSquaresCode::new();
    let ch = unified(&code, vec![vec![(c(1., 0.), code.z_bar())]]).unwrap();
    let rep = ch.validate(&code).unwrap();
    assert!(!rep.correctable);
    let off = rep.elements[0].offending.as_deref().unwrap();
    assert!(off.contains("logical Z"), "{off}");
}

fn family_specs(code: &NestedSquaresCode) -> Vec<KrausChannel> {
    let mut maps = vec![proj(0); 4];
    maps.extend(vec![m2(0., 1., 0., 0.); 4]);
    vec![
        build_spin_noise(code, "P0", &maps).unwrap(),
        build_position_noise(code, "P2", &localize_maps()).unwrap(),
        build_dephasing_loss(code, "P4", &default_loss_alphas()).unwrap(),
        build_dephasing_vanish(code, "P2").unwrap(),
        build_correctable_mixture(code, 17, 4).unwrap(),
        unified(code, vec![vec![(c(0.6, 0.), code.gauge_x(0)), (c(0., 0.8), code.stabilizer(2))]]).unwrap(),
    ]
}

#[test]
fn specs_round_trip_through_json() {
    let code = NestedSquaresCode::new();
    for ch in family_specs(&code) {
        let text = serde_json::to_string(ch.spec()).unwrap();
        let spec: NoiseSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(&spec, ch.spec());
        let back = KrausChannel::from_spec(&code, &spec).unwrap();
        assert_eq!(back.pauli_terms(), ch.pauli_terms(), "{}", spec.family());
        let unified = KrausChannel::from_spec(&code, &ch.to_unified_spec()).unwrap();
        assert_eq!(unified.pauli_terms(), ch.pauli_terms(), "{}", spec.family());
    }
}

#[test]
fn unknown_spec_fields_are_rejected() {
    let bad = r#"{"family":"dephasing_vanish","particle":"P0","strength":1.0}"#;
    assert!(serde_json::from_str::<NoiseSpec>(bad).is_err());
    let good = r#"{"family":"dephasing_vanish","particle":"P0"}"#;
    assert!(serde_json::from_str::<NoiseSpec>(good).is_ok());
}

#[test]
fn sampling_follows_the_element_weights() {
    let code = NestedSquaresCode::new();
    let ch = build_correctable_mixture(&code, 2, 3).unwrap();
    let weights: Vec<f64> = ch.pauli_terms().iter().map(|t| t[0].0.norm_sqr()).collect();
    let psi = code.zero_bar();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut counts = [0usize; 3];
    let shots = 3000;
    for _ in 0..shots {
        let (k, s) = ch.sample(&psi, &mut rng).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        counts[k] += 1;
    }
    for (n, w) in counts.iter().zip(&weights) {
        let f = *n as f64 / shots as f64;
        assert!((f - w).abs() < 4.0 * (w * (1.0 - w) / shots as f64).sqrt() + 1e-3, "{f} vs {w}");
    }
}

/// Two 2x2 maps with `A^dag A + B^dag B = I`, from a random 4x2 isometry.
fn isometry_pair(rng: &mut ChaCha8Rng) -> (CMat, CMat) {
    let m = CMat::from_fn(4, 2, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let q = m.qr().q();
    (q.rows(0, 2).into_owned(), q.rows(2, 2).into_owned())
}

fn random_spin(code: &NestedSquaresCode, seed: u64) -> KrausChannel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut maps = vec![CMat::zeros(2, 2); 8];
    for pos in 0..4 {
        let (a, b) = isometry_pair(&mut rng);
        maps[pos] = a;
        maps[pos + 4] = b;
    }
    let particle = ["P0", "P2", "P4"][rng.random_range(0..3)];
    build_spin_noise(code, particle, &maps).unwrap()
}

/// x-branch weight `t`, y-branch weight `1 - t`; each group gets a random isometry.
fn random_position(code: &NestedSquaresCode, seed: u64) -> KrausChannel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t: f64 = rng.random();
    let mut maps = vec![CMat::zeros(2, 2); 16];
    for g in 0..8 {
        let w = if g < 4 { t.sqrt() } else { (1.0 - t).sqrt() };
        let (a, b) = isometry_pair(&mut rng);
        maps[g] = a * c(w, 0.);
        maps[g + 8] = b * c(w, 0.);
    }
    let particle = ["P0", "P2", "P4"][rng.random_range(0..3)];
    build_position_noise(code, particle, &maps).unwrap()
}

fn any_channel(code: &NestedSquaresCode, kind: usize, seed: u64) -> KrausChannel {
    match kind {
        0 => random_spin(code, seed),
        1 => random_position(code, seed),
        2 => build_correctable_mixture(code, seed, 1 + (seed % 6) as usize).unwrap(),
        3 => build_dephasing_vanish(code, ["P0", "P2", "P4"][(seed % 3) as usize]).unwrap(),
        _ => build_dephasing_loss(code, ["P0", "P2", "P4"][(seed % 3) as usize], &default_loss_alphas()).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn built_channels_are_cptp_and_correctable(kind in 0usize..5, seed in any::<u64>()) {
        let code = NestedSquaresCode::new();
        let rep = any_channel(&code, kind, seed).validate(&code).unwrap();
        prop_assert!(rep.completeness_residual < 1e-10, "residual {}", rep.completeness_residual);
        prop_assert!(rep.choi_min_eigenvalue > -1e-10);
        prop_assert!(rep.correctable);
    }

    #[test]
    fn gauge_conjugation_keeps_the_verdict(kind in 0usize..5, seed in any::<u64>(), logical in any::<bool>()) {
        let code = NestedSquaresCode::new();
        let mut ch = any_channel(&code, kind, seed);
        if logical {
            // append a logical error so the verdict under test is "not correctable"
            let mut el = ch.pauli_terms();
            el.push(vec![(c(0., 0.), code.x_bar())]);
            el.push(vec![(c(1e-3, 0.), code.x_bar())]);
            ch = unified(&code, el).unwrap();
        }
        let before = ch.validate(&code).unwrap().correctable;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
        let g = code.random_gauge(&mut rng);
        let after = ch.conjugated_by(&code, &g).unwrap().validate(&code).unwrap().correctable;
        prop_assert_eq!(before, after);
        prop_assert_eq!(before, !logical);
    }

    #[test]
    fn channels_preserve_trace(kind in 0usize..5, seed in any::<u64>()) {
        let code = NestedSquaresCode::new();
        let ch = any_channel(&code, kind, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rho = random_logical(&code, &mut rng);
        ch.apply(&mut rho).unwrap();
        prop_assert!((rho.trace() - c(1., 0.)).norm() < 1e-12);
        prop_assert!(rho.hermiticity_deviation() < 1e-12);
    }
}

#[test]
fn kron_order_matches_the_particle_slots() {
    // c is the low bit: |c=1, x=0, y=0> is index 1
    let m = kron_le(&[proj(1), proj(0), proj(0)]);
    assert_eq!(m[(1, 1)], c(1., 0.));
}
