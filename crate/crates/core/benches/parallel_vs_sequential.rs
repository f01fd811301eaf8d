use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fadebound_core::bounds::LinkParams;
use fadebound_core::exec::Exec;
use fadebound_core::simulate::mc_bler_with;
use fadebound_core::sweep::{run_sweep, ChannelSpec, Scheme, SweepConfig};
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn monte_carlo(c: &mut Criterion) {
    let cons = Scheme::Orthogonal { m: 16 }.constellation().unwrap();
    let ch = ChannelSpec::exponential(2, 0.1).build().unwrap();
    let link = LinkParams::from_db(10.0).unwrap();
    let mut group = c.benchmark_group("mc_bler_orthogonal16_20k");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(mc_bler_with(exec, &cons, &ch, link, 20_000, 7, 0).unwrap()))
        });
    }
    group.finish();
}

fn bound_sweep(c: &mut Criterion) {
    let cfg = SweepConfig::bounds(
        Scheme::Gaussian { k: 9, m: 60, seed: 1 },
        ChannelSpec::exponential(2, 0.1),
        0.0,
        30.0,
        1.0,
    );
    let mut group = c.benchmark_group("sweep_gaussian60_31pts");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(run_sweep(&cfg, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, bound_sweep);
criterion_main!(benches);
