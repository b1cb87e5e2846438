// Run once as is and once with `--no-default-features`; the group name records
// which build produced the numbers so criterion keeps them apart.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nsq::code::NestedSquaresCode;
use nsq::engine::{DensityMatrix, StateVector};
use nsq::layout::{RegisterLayout, Role};
use nsq::linalg::{c, kron_le, mat_h, mat_x};
use nsq::pauli::PauliOperator;
use nsq::recovery::Recovery;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BUILD: &str = if cfg!(feature = "parallel") { "parallel" } else { "sequential" };

fn random_state(layout: RegisterLayout, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1usize << layout.n_qubits();
    let amps = (0..n).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    StateVector::from_amplitudes_unnormalized(layout, amps).unwrap()
}

fn register(ids: &[&str]) -> RegisterLayout {
    let pairs: Vec<(&str, Role)> = ids.iter().map(|id| (*id, Role::Physical)).collect();
    RegisterLayout::from_ids(&pairs).unwrap()
}

fn statevector(cr: &mut Criterion) {
    let mut g = cr.benchmark_group(format!("statevector/{BUILD}"));
    for ids in [&["P0", "P1", "P2", "P3", "P4"][..], &["P0", "P1", "P2", "P3", "P4", "P5"][..]] {
        let layout = register(ids);
        let n = layout.n_qubits();
        let psi = random_state(layout, 1);
        let h2 = kron_le(&[mat_h(), mat_x()]);
        g.bench_with_input(BenchmarkId::new("two-qubit gate", n), &psi, |b, psi| {
            let mut s = psi.clone();
            b.iter(|| s.apply_matrix(&[1, n - 2], &h2).unwrap());
        });
        let p = PauliOperator::from_parts(n, 0, 0b1010_0101, (1 << (n - 1)) | 0b11).unwrap();
        g.bench_with_input(BenchmarkId::new("pauli expectation", n), &psi, |b, psi| {
            b.iter(|| psi.expectation_complex(&p).unwrap());
        });
    }
    g.finish();
}

fn density(cr: &mut Criterion) {
    let code = NestedSquaresCode::new();
    let rec = Recovery::new(&code).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let t: f64 = rng.random::<f64>() * std::f64::consts::PI;
    let psi = code.logical_state(c(t.cos(), 0.), c(0., t.sin())).unwrap();
    let rho = DensityMatrix::from_pure(&psi).unwrap();
    let mut g = cr.benchmark_group(format!("density/{BUILD}"));
    let p = code.parse("+Xc.Zx.Iy@P2").unwrap();
    g.bench_function("pauli conjugation", |b| {
        let mut r = rho.clone();
        b.iter(|| r.conjugate_pauli(&p).unwrap());
    });
    g.bench_function("syndrome probabilities", |b| b.iter(|| rec.syndrome_probabilities(&rho).unwrap()));
    g.bench_function("recovery map", |b| b.iter(|| rec.recover(&rho).unwrap()));
    g.finish();
}

criterion_group!(benches, statevector, density);
criterion_main!(benches);
