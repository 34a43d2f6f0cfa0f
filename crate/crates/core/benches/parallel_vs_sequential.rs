use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use concatgv::codes::{weight_distribution_with, BinaryCode, ConcatCode, OuterCode};
use concatgv::exec::Exec;
use concatgv::field::FieldCtx;
use concatgv::moments::moment_dual_with;
use concatgv::sweep::{run_sweep_with, SweepConfig};

const BUDGET: u128 = 1 << 26;

fn strategies() -> Vec<(&'static str, Exec)> {
    vec![
        ("sequential", Exec::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Exec::Parallel),
    ]
}

fn weight_enumeration(c: &mut Criterion) {
    let code = BinaryCode::random(48, 22, 7).unwrap();
    let mut group = c.benchmark_group("weight_distribution_2^22");
    group.sample_size(10);
    for (name, exec) in strategies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| weight_distribution_with(&code, BUDGET, exec).unwrap())
        });
    }
    group.finish();
}

fn dual_moment(c: &mut Criterion) {
    let ctx = Arc::new(FieldCtx::new(4).unwrap());
    let outer = OuterCode::random(ctx, 6, 3, 11).unwrap();
    let inner = BinaryCode::random(8, 4, 12).unwrap();
    let cc = ConcatCode::new(outer, inner).unwrap();
    let mut group = c.benchmark_group("moment_dual_r4");
    group.sample_size(10);
    for (name, exec) in strategies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| moment_dual_with(&cc, 4, BUDGET, exec).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut cfg = SweepConfig::new(4, 8, 6, 3, 256, 1);
    cfg.run_nice = true;
    let mut group = c.benchmark_group("sweep_256_trials");
    group.sample_size(10);
    for (name, exec) in strategies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_sweep_with(&cfg, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, weight_enumeration, dual_moment, sweep);
criterion_main!(benches);
