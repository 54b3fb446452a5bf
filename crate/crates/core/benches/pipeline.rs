use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use neckstress::elasticity::ElasticParams;
use neckstress::fem::{assemble_stiffness, ElementOrder, FeSpace};
use neckstress::geometry::{build_mesh, GradingConfig, NeckProfile};
use neckstress::harness::{run_sweep, ExperimentConfig};
use neckstress::par::{set_execution, Execution};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn assembly(c: &mut Criterion) {
    let profile = NeckProfile::power(2, 1e-4, 2.0).unwrap();
    let mesh = Arc::new(
        build_mesh(
            &profile,
            &GradingConfig {
                budget: 4.0,
                ..Default::default()
            },
        )
        .unwrap(),
    );
    let space = FeSpace::new(mesh, ElementOrder::Quadratic);
    let params = ElasticParams::unit_2d();
    let mut group = c.benchmark_group("assemble_stiffness");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            set_execution(mode);
            b.iter(|| assemble_stiffness(&space, &params))
        });
    }
    group.finish();
    set_execution(Execution::Parallel);
}

fn sweep(c: &mut Criterion) {
    let mut config = ExperimentConfig::default();
    config.set("eps_list", "1e-2:1e-4:4").unwrap();
    let mut group = c.benchmark_group("sweep_m2_4pts");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            set_execution(mode);
            b.iter(|| run_sweep(&config).unwrap())
        });
    }
    group.finish();
    set_execution(Execution::Parallel);
}

criterion_group!(benches, assembly, sweep);
criterion_main!(benches);
