use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use negcert::ingest::{lattice_constraints, ConstraintSource};
use negcert::{
    bochner_matrix, cf_empirical, certify_bound, draw_test_vectors, solve, wigner_from_cf, Angle,
    CFGrid, Estimator, Lattice, SolverConfig, StateModel, ThetaFilter, WignerSpec,
};
use negcert_bench::{cat_data, cat_problem, fock_data};

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_quadrature");
    for (name, state, angle) in [
        ("fock1_fixed", StateModel::fock(1).unwrap(), Angle::Fixed(0.3)),
        ("fock1_random", StateModel::fock(1).unwrap(), Angle::PhaseRandom),
        ("cat_random", StateModel::cat(1.77).unwrap(), Angle::PhaseRandom),
    ] {
        g.bench_function(name, |b| {
            b.iter(|| negcert::sample_quadrature(&state, angle, 100_000, black_box(1)).unwrap())
        });
    }
    g.finish();
}

fn ingestion(c: &mut Criterion) {
    let cat = cat_data(100_000, 3);
    let slice = cat.select(ThetaFilter::Near { theta: 0.0, tol: 1e-9 }).unwrap();
    c.bench_function("cf_empirical_1e5", |b| b.iter(|| cf_empirical(&slice, black_box(1.3), 5.0).unwrap()));

    let fock = fock_data(180_000, 1);
    let lattice = Lattice::new(37, 6.0).unwrap();
    c.bench_function("radial_constraints_37x37", |b| {
        b.iter(|| {
            lattice_constraints(
                &ConstraintSource::Radial { data: &fock, estimator: Estimator::Empirical, n_sigmas: 5.0 },
                &lattice,
            )
            .unwrap()
        })
    });
}

fn bochner(c: &mut Criterion) {
    let lattice = Lattice::new(37, 6.0).unwrap();
    let t = draw_test_vectors(&lattice, 200, 0).unwrap();
    let s = StateModel::cat(1.77).unwrap();
    c.bench_function("bochner_matrix_m200", |b| b.iter(|| bochner_matrix(&s, &t, black_box(1.0)).unwrap()));
}

fn sdp(c: &mut Criterion) {
    let mut g = c.benchmark_group("cat_solve");
    g.sample_size(10);
    for m in [20, 50, 100] {
        let p = cat_problem(m);
        g.bench_with_input(BenchmarkId::from_parameter(m), &p, |b, p| {
            b.iter(|| {
                let raw = solve(p, &SolverConfig::default()).unwrap();
                certify_bound(p, &raw).unwrap()
            })
        });
    }
    g.finish();
}

fn wigner(c: &mut Criterion) {
    let s = StateModel::fock(1).unwrap();
    let grid = CFGrid::from_fn(Lattice::new(37, 6.0).unwrap(), |xi| s.chi(xi));
    let spec = WignerSpec::default();
    c.bench_function("wigner_from_cf_37_to_81", |b| b.iter(|| wigner_from_cf(black_box(&grid), &spec).unwrap()));
}

criterion_group!(benches, sampling, ingestion, bochner, sdp, wigner);
criterion_main!(benches);
