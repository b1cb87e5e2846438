use nsq::engine::{enumerate, enumerate_density, DensityMatrix, GateOp, KrausOp, Projector, StateVector};
use nsq::layout::{RegisterLayout, Role};
use nsq::linalg::{c, max_abs_diff, outer, CMat};
use nsq::pauli::PauliOperator;
use nsq::C64;
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn register(particles: usize) -> RegisterLayout {
    let ids: Vec<String> = (0..particles).map(|k| format!("Q{k}")).collect();
    let pairs: Vec<(&str, Role)> = ids.iter().map(|s| (s.as_str(), Role::Physical)).collect();
    RegisterLayout::from_ids(&pairs).unwrap()
}

fn gaussian_matrix(d: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(d, cols, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

fn random_unitary(d: usize, rng: &mut impl Rng) -> CMat {
    gaussian_matrix(d, d, rng).qr().q()
}

fn random_state(layout: RegisterLayout, rng: &mut impl Rng) -> StateVector {
    let d = 1usize << layout.n_qubits();
    let amps = (0..d).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let mut psi = StateVector::from_amplitudes_unnormalized(layout, amps).unwrap();
    psi.normalize();
    psi
}

fn random_targets(n: usize, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    sample(rng, n, k).into_vec()
}

// full-register matrix of `m` on `targets`, entry by entry
fn embed(m: &CMat, targets: &[usize], n: usize) -> CMat {
    let d = 1usize << n;
    let tmask: usize = targets.iter().map(|q| 1 << q).sum();
    let local = |i: usize| targets.iter().enumerate().map(|(k, &q)| (i >> q & 1) << k).sum::<usize>();
    CMat::from_fn(d, d, |i, j| if i & !tmask == j & !tmask { m[(local(i), local(j))] } else { C64::new(0.0, 0.0) })
}

fn random_mixed(layout: RegisterLayout, rng: &mut impl Rng) -> DensityMatrix {
    let d = 1usize << layout.n_qubits();
    let a = gaussian_matrix(d, d, rng);
    let mut rho = &a * a.adjoint();
    let t = rho.trace();
    rho /= t;
    DensityMatrix::from_matrix(layout, &rho).unwrap()
}

#[test]
fn unitaries_preserve_norm_at_width_eighteen() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let mut pairs = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let mut psi = random_state(register(6), &mut rng);
        for _ in 0..1000 {
            let k = rng.random_range(1..=2);
            let t = random_targets(18, k, &mut rng);
            psi.apply(&GateOp::unitary("u", t, random_unitary(1 << k, &mut rng)).unwrap()).unwrap();
            worst = worst.max((psi.norm_sqr() - 1.0).abs());
            pairs += 1;
        }
    }
    assert!(pairs >= 10_000);
    assert!(worst < 1e-12, "norm drift {worst:e}");
}

#[test]
fn kernels_match_the_full_matrix_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = 3 * rng.random_range(1..=3);
        let k = rng.random_range(1..=3);
        let t = random_targets(n, k, &mut rng);
        let g = GateOp::unitary("u", t.clone(), random_unitary(1 << k, &mut rng)).unwrap();
        let full = g.full_matrix(n).unwrap();
        assert!(max_abs_diff(&full, &embed(&g.matrix(), &t, n)) < 1e-12);
        let psi = random_state(register(n / 3), &mut rng);
        let mut fast = psi.clone();
        fast.apply(&g).unwrap();
        let slow = &full * nalgebra::DVector::from_column_slice(psi.amplitudes());
        let diff = fast.amplitudes().iter().zip(slow.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }
}

// naive sum_k sum_ab E[i][a] rho[a][b] conj(E[j][b])
fn naive_operator_sum(rho: &CMat, elements: &[CMat]) -> CMat {
    let d = rho.nrows();
    let mut out = CMat::zeros(d, d);
    for e in elements {
        for i in 0..d {
            for j in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..d {
                    if e[(i, a)].norm_sqr() == 0.0 {
                        continue;
                    }
                    for b in 0..d {
                        acc += e[(i, a)] * rho[(a, b)] * e[(j, b)].conj();
                    }
                }
                out[(i, j)] += acc;
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operator_sum_matches_naive_loop(seed in any::<u64>(), k in 1usize..=2, count in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 6;
        let rho = random_mixed(register(2), &mut rng);
        let t = random_targets(n, k, &mut rng);
        let d = 1 << k;
        // blocks of an isometry, so the elements are complete
        let u = random_unitary(d * count, &mut rng);
        let blocks: Vec<CMat> = (0..count).map(|b| u.view((b * d, 0), (d, d)).into_owned()).collect();
        let ops: Vec<KrausOp> = blocks.iter().map(|m| KrausOp::Dense { targets: t.clone(), matrix: m.clone() }).collect();
        let mut pauli = random_pauli_ops(n, &mut rng);
        let full: Vec<CMat> = blocks.iter().map(|m| embed(m, &t, n)).chain(pauli.iter().map(|(w, p)| p.dense_matrix().unwrap() * *w)).collect();
        let want = naive_operator_sum(&rho.to_matrix(), &full);
        let mut got = rho.clone();
        let mut all = ops;
        all.extend(pauli.drain(..).map(|(coef, op)| KrausOp::Pauli { coef, op }));
        got.apply_operator_sum(&all).unwrap();
        prop_assert!(max_abs_diff(&got.to_matrix(), &want) < 1e-12);
    }

    #[test]
    fn branch_probabilities_sum_to_one(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_state(register(3), &mut rng);
        let q = rng.random_range(0..9);
        let p = loop {
            let p = random_hermitian_pauli(9, &mut rng);
            if !p.is_identity_up_to_phase() {
                break p;
            }
        };
        let sets = [
            vec![Projector::qubit(q, 0), Projector::qubit(q, 1)],
            vec![Projector::Pauli(vec![(p, false)]), Projector::Pauli(vec![(p, true)])],
        ];
        let rho = psi.to_density().unwrap();
        for set in &sets {
            let total: f64 = enumerate(&psi, set).unwrap().iter().map(|b| b.probability).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
            let total: f64 = enumerate_density(&rho, set).unwrap().iter().map(|b| b.probability).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn state_and_density_paths_agree(seed in any::<u64>(), steps in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut psi = random_state(register(2), &mut rng);
        let mut rho = psi.to_density().unwrap();
        for _ in 0..steps {
            let k = rng.random_range(1..=3);
            let g = GateOp::unitary("u", random_targets(6, k, &mut rng), random_unitary(1 << k, &mut rng)).unwrap();
            psi.apply(&g).unwrap();
            rho.apply(&g).unwrap();
        }
        prop_assert!(max_abs_diff(&rho.to_matrix(), &outer(psi.amplitudes())) < 1e-10);
        prop_assert!(rho.hermiticity_deviation() < 1e-12);
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }
}

fn random_hermitian_pauli(n: usize, rng: &mut impl Rng) -> PauliOperator {
    let m = (1u64 << n) - 1;
    PauliOperator::from_parts(n, 0, rng.random::<u64>() & m, rng.random::<u64>() & m).unwrap().hermitian_form()
}

fn random_pauli_ops(n: usize, rng: &mut impl Rng) -> Vec<(C64, PauliOperator)> {
    (0..rng.random_range(0..3))
        .map(|_| (c(rng.random::<f64>(), rng.random::<f64>()), random_hermitian_pauli(n, rng)))
        .collect()
}
