use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rap_core::cover::cover_profile_with;
use rap_core::montecarlo::estimate_value;
use rap_core::oracle::{Oracle, OracleLimits};
use rap_core::{Execution, RapInstance, ZeroPattern};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn monte_carlo(c: &mut Criterion) {
    let p = RapInstance::with_zeros(6, 6, 5, &[(0, 0), (1, 3), (4, 2)]).unwrap();
    let mut group = c.benchmark_group("monte_carlo_6x6");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| estimate_value(&p, 20_000, 7, exec).unwrap())
        });
    }
    group.finish();
}

fn cover_profile(c: &mut Criterion) {
    let p = RapInstance::with_zeros(10, 10, 6, &[(0, 0), (1, 1), (2, 5), (3, 5), (7, 9)]).unwrap();
    let mut group = c.benchmark_group("cover_profile_10x10");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| cover_profile_with(&p, exec))
        });
    }
    group.finish();
}

fn oracle_sweep(c: &mut Criterion) {
    let instances: Vec<RapInstance> = (0..1u64 << 9)
        .step_by(7)
        .map(|mask| RapInstance::new(ZeroPattern::from_mask(3, 3, mask).unwrap(), 3).unwrap())
        .collect();
    let mut group = c.benchmark_group("oracle_3x3_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let oracle = Oracle::new(OracleLimits::default()).with_execution(exec);
                for p in &instances {
                    oracle.evaluate(p).unwrap();
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, cover_profile, oracle_sweep);
criterion_main!(benches);
