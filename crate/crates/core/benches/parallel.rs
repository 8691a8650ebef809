use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dyadic_lab::circle::QuarterMoments;
use dyadic_lab::norms::{materialize, norm_p_lower, OperatorKind, PowerOptions, SpaceDescriptor};
use dyadic_lab::toss::TossFunction;
use dyadic_lab::Execution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn enumeration(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = TossFunction::random(6, 2, &mut rng);
    let g = TossFunction::random(6, 2, &mut rng);
    let moments = QuarterMoments::shared().expect("moments");
    let mut group = c.benchmark_group("toss_enumeration");
    for (name, exec) in MODES {
        group.bench_with_input(
            BenchmarkId::new("expect_pairing", name),
            &exec,
            |b, exec| b.iter(|| f.expect_pairing_with(&g, *exec).expect("pairing")),
        );
        group.bench_with_input(
            BenchmarkId::new("hilbert_pairing", name),
            &exec,
            |b, exec| {
                b.iter(|| {
                    f.apply_h_increments()
                        .pair_reduced_with(&g, &moments, *exec)
                        .expect("pairing")
                })
            },
        );
    }
    group.finish();
}

fn power_iteration(c: &mut Criterion) {
    let m = materialize(&OperatorKind::S0, 5, 2).expect("matrix");
    let space = SpaceDescriptor::lq(3.0, 1.5, 2).expect("space");
    let mut group = c.benchmark_group("norm_p_lower");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = PowerOptions::default()
            .with_restarts(8)
            .with_seed(3)
            .with_exec(exec);
        group.bench_with_input(BenchmarkId::new("s0_depth5", name), &opts, |b, opts| {
            b.iter(|| norm_p_lower(&m, &space, opts).expect("estimate"))
        });
    }
    group.finish();
}

criterion_group!(benches, enumeration, power_iteration);
criterion_main!(benches);
