use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use repcomm::harness::{compute_sweep, parse_sweep_config};
use repcomm::oracle::{run_seeds, OracleSettings};
use repcomm::par::{parallel_enabled, Execution};
use repcomm::ModelParams;

fn modes() -> Vec<(&'static str, Execution)> {
    let mut modes = vec![("sequential", Execution::Sequential)];
    if parallel_enabled() {
        modes.push(("parallel", Execution::default()));
    }
    modes
}

fn sweep(c: &mut Criterion) {
    let config = parse_sweep_config(
        "variant = no-clique\nL = 10\nt_end = 100\naxis1 = alpha -1 1 11\naxis2 = sigma -1 1 11\n",
    )
    .unwrap();
    let mut group = c.benchmark_group("alpha_sigma_sweep_11x11");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(compute_sweep(&config, exec).unwrap()))
        });
    }
    group.finish();
}

fn oracle_seeds(c: &mut Criterion) {
    let params = ModelParams::no_clique(10, 0.0, 0.0).unwrap();
    let settings = OracleSettings::new(2000, 0.05, 20.0, 0);
    let seeds: Vec<u64> = (1..=8).collect();
    let mut group = c.benchmark_group("oracle_8_seeds_n2000");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(run_seeds(&settings, &params, &[6], &seeds, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, sweep, oracle_seeds);
criterion_main!(benches);
