//! Benchmarks of the numerical kernels and the hot experiment paths:
//! the Hermitian eigensolver, channel algebra, the Monte-Carlo residual
//! evaluation, and representative optimization programs.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qcg_core::bayes::{commutation_residual, petz_emergent, Generator};
use qcg_core::channels::{compose_via_choi, kraus_to_choi};
use qcg_core::linalg::ComplexMatrix;
use qcg_core::scenarios::{random_density, Scenario};
use qcg_core::sdp::programs::{compatibilize, diamond_distance};
use qcg_core::KrausChannel;

fn bench_eigh(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h16 = random_density(16, &mut rng);
    let h4 = random_density(4, &mut rng);
    c.bench_function("eigh_4x4", |b| b.iter(|| black_box(&h4).eigh().unwrap()));
    c.bench_function("eigh_16x16", |b| b.iter(|| black_box(&h16).eigh().unwrap()));
}

fn bench_channel_algebra(c: &mut Criterion) {
    let sc = Scenario::new(2).unwrap();
    let u = sc.unitary(1.0);
    let cg = sc.cg();
    c.bench_function("kraus_to_choi_4to2", |b| b.iter(|| kraus_to_choi(black_box(&cg))));
    let choi_u = kraus_to_choi(&u);
    let choi_cg = kraus_to_choi(&cg);
    c.bench_function("compose_via_choi", |b| {
        b.iter(|| compose_via_choi(black_box(&choi_cg), black_box(&choi_u)).unwrap())
    });
}

fn bench_monte_carlo_inner_loop(c: &mut Criterion) {
    let sc = Scenario::new(4).unwrap();
    let gen = Generator::new(ComplexMatrix::identity(4).scale_re(0.25), "MM").unwrap();
    let emergent = petz_emergent(&sc.unitary(1.0), &sc.cg(), &gen).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let states: Vec<ComplexMatrix> = (0..64).map(|_| random_density(4, &mut rng)).collect();
    let cg = sc.cg();
    let u = sc.unitary(1.0);
    let mut idx = 0usize;
    c.bench_function("commutation_residual", |b| {
        b.iter(|| {
            idx = (idx + 1) % states.len();
            commutation_residual(&emergent, &cg, &u, black_box(&states[idx])).unwrap()
        })
    });
}

fn bench_petz_construction(c: &mut Criterion) {
    let sc = Scenario::new(2).unwrap();
    let gen = Generator::new(ComplexMatrix::identity(4).scale_re(0.25), "MM").unwrap();
    c.bench_function("petz_emergent", |b| {
        b.iter(|| petz_emergent(&sc.unitary(1.0), &sc.cg(), black_box(&gen)).unwrap())
    });
}

fn bench_sdp_programs(c: &mut Criterion) {
    let id = KrausChannel::identity(2);
    let zf = KrausChannel::unitary(qcg_core::bloch::sigma_z()).unwrap();
    c.bench_function("diamond_distance_qubit", |b| {
        b.iter(|| diamond_distance(black_box(&id), black_box(&zf)).unwrap())
    });
    let sc = Scenario::new(2).unwrap();
    c.bench_function("compatibilize_probe", |b| {
        b.iter(|| compatibilize(black_box(&sc), 1.0, 0.3).unwrap())
    });
}

criterion_group!(
    benches,
    bench_eigh,
    bench_channel_algebra,
    bench_monte_carlo_inner_loop,
    bench_petz_construction,
    bench_sdp_programs
);
criterion_main!(benches);
