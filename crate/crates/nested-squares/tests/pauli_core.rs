use nsq::code::NestedSquaresCode;
use nsq::linalg::{c, identity, kron_le, mat_x, mat_z, max_abs_diff, unitarity_deviation, CMat};
use nsq::pauli::{i_pow, PauliGroup, PauliOperator};
use nsq::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pauli(width: usize) -> impl Strategy<Value = PauliOperator> {
    let m = (1u64 << width) - 1;
    (0u8..4, any::<u64>(), any::<u64>()).prop_map(move |(ph, x, z)| PauliOperator::from_parts(width, ph, x & m, z & m).unwrap())
}

fn random_pauli(width: usize, rng: &mut impl Rng) -> PauliOperator {
    let m = (1u64 << width) - 1;
    PauliOperator::from_parts(width, rng.random_range(0..4), rng.random::<u64>() & m, rng.random::<u64>() & m).unwrap()
}

// phase * prod_k X_k^x Z_k^z, assembled from 2x2 factors
fn oracle(p: &PauliOperator) -> CMat {
    let factors: Vec<CMat> = (0..p.width())
        .map(|k| {
            let mut f = identity(2);
            if p.xmask() >> k & 1 == 1 {
                f = mat_x();
            }
            if p.zmask() >> k & 1 == 1 {
                f *= mat_z();
            }
            f
        })
        .collect();
    kron_le(&factors) * i_pow(p.phase())
}

proptest! {
    #[test]
    fn multiply_is_associative(w in 1usize..=18, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, cc) = (random_pauli(w, &mut rng), random_pauli(w, &mut rng), random_pauli(w, &mut rng));
        let left = a.multiply(&b).unwrap().multiply(&cc).unwrap();
        let right = a.multiply(&b.multiply(&cc).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn square_is_plus_or_minus_identity(a in (1usize..=18).prop_flat_map(pauli)) {
        let sq = a.multiply(&a).unwrap();
        prop_assert_eq!(sq.xmask() | sq.zmask(), 0);
        prop_assert!(sq.phase().is_multiple_of(2));
        prop_assert_eq!(sq.phase() == 0, a.is_hermitian());
    }

    #[test]
    fn dense_matrix_matches_factor_product(a in (1usize..=6).prop_flat_map(pauli)) {
        let m = a.dense_matrix().unwrap();
        prop_assert!(max_abs_diff(&m, &oracle(&a)) < 1e-12);
        prop_assert!(unitarity_deviation(&m) < 1e-12);
    }

    #[test]
    fn membership_survives_reordering_and_row_operations(
        seed in any::<u64>(),
        n in 1usize..8,
        i in 0usize..8,
        j in 0usize..8,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens: Vec<PauliOperator> = (0..n).map(|_| random_pauli(9, &mut rng).hermitian_form()).collect();
        let (i, j) = (i % n, j % n);
        let mut shuffled = gens.clone();
        shuffled.reverse();
        shuffled.rotate_left(i);
        let mut combined = gens.clone();
        if i != j {
            combined[i] = gens[i].multiply(&gens[j]).unwrap();
        }
        let g = PauliGroup::new(9, gens.clone()).unwrap();
        let variants = [PauliGroup::new(9, shuffled).unwrap(), PauliGroup::new(9, combined).unwrap()];
        let member = gens.iter().take(i + 1).fold(PauliOperator::identity(9), |acc, p| acc.multiply(p).unwrap());
        for cand in [member, random_pauli(9, &mut rng)] {
            let want = g.contains(&cand, true).unwrap();
            for v in &variants {
                prop_assert_eq!(v.rank(), g.rank());
                prop_assert_eq!(v.contains(&cand, true).unwrap(), want);
            }
        }
        prop_assert!(g.contains(&gens.iter().fold(PauliOperator::identity(9), |a, p| a.multiply(p).unwrap()), true).unwrap());
    }
}

fn commutator_norm(a: &CMat, b: &CMat) -> f64 {
    (a * b - b * a).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn commutation_agrees_with_matrices_exhaustively_up_to_width_four() {
    for w in 1..=4usize {
        let all: Vec<(PauliOperator, CMat)> = (0..1u64 << (2 * w))
            .map(|k| {
                let p = PauliOperator::from_parts(w, 0, k & ((1 << w) - 1), k >> w).unwrap();
                let m = oracle(&p);
                (p, m)
            })
            .collect();
        for (a, ma) in &all {
            for (b, mb) in &all {
                let dense = commutator_norm(ma, mb) > 1e-12;
                assert_eq!(!a.commutes(b).unwrap(), dense, "{a:?} {b:?}");
            }
        }
    }
}

#[test]
fn commutation_agrees_with_matrices_on_random_width_nine_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let v: Vec<C64> = (0..512).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let v = nalgebra::DVector::from_vec(v);
    for _ in 0..1000 {
        let (a, b) = (random_pauli(9, &mut rng), random_pauli(9, &mut rng));
        let (ma, mb) = (oracle(&a), oracle(&b));
        let gap = (&ma * (&mb * &v) - &mb * (&ma * &v)).norm();
        assert_eq!(!a.commutes(&b).unwrap(), gap > 1e-9, "{a:?} {b:?}");
    }
}

#[test]
fn code_generators_have_rank_ten_and_logicals_extend_it() {
    let code = NestedSquaresCode::new();
    let mut gens: Vec<PauliOperator> = code.stabilizers().to_vec();
    gens.extend([code.gauge_z(0), code.gauge_x(0), code.gauge_z(1), code.gauge_x(1)]);
    assert_eq!(PauliGroup::new(9, gens.clone()).unwrap().rank(), 10);
    for extra in [vec![code.z_bar()], vec![code.x_bar()]] {
        let g: Vec<_> = gens.iter().copied().chain(extra).collect();
        assert_eq!(PauliGroup::new(9, g).unwrap().rank(), 11);
    }
    let g: Vec<_> = gens.iter().copied().chain([code.z_bar(), code.x_bar()]).collect();
    assert_eq!(PauliGroup::new(9, g).unwrap().rank(), 12);
}
