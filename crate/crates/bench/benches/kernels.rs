use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use poslab_core::geometry::{make_model, DomainSpec, WarpingProfile};
use poslab_core::groundstate::solve_dirichlet_ground;
use poslab_core::kato::brezis_kato_check;
use poslab_core::operators::{
    check_subsolution, spectral_bottom, DiscreteOperator, GridFunction, Region,
};
use poslab_core::smoothing::monotone_smooth_approx;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bench_certificates(c: &mut Criterion) {
    let mut group = c.benchmark_group("check_subsolution");
    for nodes in [1_000usize, 10_000, 100_000] {
        let (_, grid) =
            make_model(WarpingProfile::Euclidean, 3, DomainSpec::ball(8.0), nodes).unwrap();
        let lap = DiscreteOperator::laplacian(&grid);
        let u = GridFunction::from_fn(&grid, |r| if r < 1.0 { -1.0 } else { -1.0 / r });
        let region = Region::all(&grid);
        group.bench_with_input(BenchmarkId::from_parameter(nodes), &nodes, |b, _| {
            b.iter(|| black_box(check_subsolution(&u, &lap, region)))
        });
    }
    group.finish();
}

fn bench_ground_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("dirichlet_ground");
    for nodes in [1_000usize, 10_000, 100_000] {
        let (_, grid) =
            make_model(WarpingProfile::Hyperbolic, 2, DomainSpec::ball(4.0), nodes).unwrap();
        let op = DiscreteOperator::schrodinger_const(&grid, 1.0).unwrap();
        let region = Region::from_radii(&grid, 0.5, 3.5).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(nodes), &nodes, |b, _| {
            b.iter(|| black_box(solve_dirichlet_ground(&op, region, 1.0).unwrap()))
        });
    }
    group.finish();
}

fn bench_smoothing(c: &mut Criterion) {
    let (_, grid) = make_model(WarpingProfile::Euclidean, 3, DomainSpec::ball(2.0), 4001).unwrap();
    let lap = DiscreteOperator::laplacian(&grid);
    let region = Region::from_radii(&grid, 0.5, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = poslab_core::sampling::random_positive_subharmonic(&lap, region, &mut rng);
    c.bench_function("monotone_smooth_approx_k3", |b| {
        b.iter(|| black_box(monotone_smooth_approx(&u, &lap, region, 3, None).unwrap()))
    });
}

fn bench_spectral(c: &mut Criterion) {
    let (_, grid) = make_model(WarpingProfile::LinearCap, 2, DomainSpec::ball(6.0), 8001).unwrap();
    let lap = DiscreteOperator::laplacian(&grid);
    let region = Region::from_radii(&grid, 2.0, 2.0 + std::f64::consts::PI).unwrap();
    c.bench_function("spectral_bottom_8k", |b| {
        b.iter(|| black_box(spectral_bottom(&lap, region).unwrap()))
    });
}

fn bench_kato(c: &mut Criterion) {
    let (_, grid) = make_model(WarpingProfile::Euclidean, 3, DomainSpec::ball(2.0), 2001).unwrap();
    let op = DiscreteOperator::schrodinger_const(&grid, 1.0).unwrap();
    let region = Region::all(&grid);
    let u = GridFunction::from_fn(&grid, |r| {
        let s = if r == 0.0 { 1.0 } else { r.sinh() / r };
        s - 1.1
    });
    c.bench_function("brezis_kato_ladder_2k", |b| {
        b.iter(|| black_box(brezis_kato_check(&u, &op, region).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_certificates,
    bench_ground_solve,
    bench_smoothing,
    bench_spectral,
    bench_kato
);
criterion_main!(benches);
