//! Engine comparison on matched inputs: the quadratic row DP, the
//! bit-parallel engine, and the lattice-path formulation, plus the planted-run
//! sampling-and-alignment pipeline. The bit-parallel engine is expected to
//! lead the row DP by well over an order of magnitude at these lengths; the
//! gap is reported by criterion, not asserted.

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use lcsfluct_core::align::optimal_partition;
use lcsfluct_core::lcs::{lcs_bitparallel, lcs_dp, lcs_lpp_oracle};
use lcsfluct_core::model::{gen_iid, sample_pair, ModelParams};

fn score_engines(c: &mut Criterion) {
    let n = 4096;
    let a = gen_iid(n, 2, 11).expect("valid alphabet");
    let b = gen_iid(n, 2, 12).expect("valid alphabet");
    let mut group = c.benchmark_group("score-4096-k2");
    group.sample_size(20);
    group.throughput(Throughput::Elements((n * n) as u64));
    group.bench_function("row-dp", |bench| bench.iter(|| lcs_dp(&a, &b)));
    group.bench_function("bit-parallel", |bench| {
        bench.iter(|| lcs_bitparallel(&a, &b, 2))
    });
    group.bench_function("lattice-path", |bench| bench.iter(|| lcs_lpp_oracle(&a, &b)));
    group.finish();
}

fn model_pipeline(c: &mut Criterion) {
    let params = ModelParams::new(2, 64, 0.75, 0.5, 16).expect("valid params");
    let sample = sample_pair(&params, 7);
    let mut group = c.benchmark_group("planted-run-d64-m16");
    group.sample_size(20);
    group.bench_function("sample-pair", |bench| {
        let mut seed = 0u64;
        bench.iter(|| {
            seed = seed.wrapping_add(1);
            sample_pair(&params, seed)
        })
    });
    group.bench_function("optimal-partition", |bench| {
        bench.iter(|| optimal_partition(&sample.x, &sample.y, params.d))
    });
    group.finish();
}

criterion_group!(benches, score_engines, model_pipeline);
criterion_main!(benches);
