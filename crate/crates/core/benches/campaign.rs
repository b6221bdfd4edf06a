use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tave_core::analysis::{estimate_lambda_with, LambdaOptions};
use tave_core::campaign::{generate_instance, run_campaign_with, Scenario, ScenarioSpec};
use tave_core::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn campaigns(c: &mut Criterion) {
    let mut group = c.benchmark_group("campaign");
    group.sample_size(10);
    for (p, n) in [(3, 10), (4, 10)] {
        let spec = ScenarioSpec {
            trials: 32,
            seed: 7,
            ..ScenarioSpec::new(Scenario::MM, p, p, n)
        };
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, spec.label()), &spec, |bench, spec| {
                bench.iter(|| run_campaign_with(spec, mode).unwrap())
            });
        }
    }
    group.finish();
}

fn lambda_multistart(c: &mut Criterion) {
    let mut group = c.benchmark_group("lambda_multistart");
    group.sample_size(10);
    let (problem, _) = generate_instance(&ScenarioSpec::new(Scenario::GG, 4, 4, 8), 0).unwrap();
    for (name, mode) in MODES {
        let opts = LambdaOptions {
            restarts: 64,
            execution: mode,
            ..LambdaOptions::default()
        };
        group.bench_function(name, |bench| bench.iter(|| estimate_lambda_with(problem.a(), &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, campaigns, lambda_multistart);
criterion_main!(benches);
