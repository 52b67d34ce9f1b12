use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lemonsim_core::{default_params, run_experiment, Exec, PolicyScenario, SimParams};

fn bench_replications(c: &mut Criterion) {
    let params = SimParams { n_periods: 50, ..default_params() };
    let scenario = PolicyScenario::baseline();
    let reps = 8;
    let mut group = c.benchmark_group("baseline_8_reps_50_periods");
    group.sample_size(10);
    for (label, exec) in [("sequential", Exec::SEQUENTIAL), ("parallel", Exec::new(0))] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &exec, |b, &exec| {
            b.iter(|| run_experiment(&params, &scenario, reps, 1, exec).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_replications);
criterion_main!(benches);
