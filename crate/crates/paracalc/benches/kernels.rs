//! Hot kernels timed under the rayon build and the sequential fallback.
//!
//!     cargo bench -p paracalc --bench kernels
//!     cargo bench -p paracalc --bench kernels --no-default-features
//!
//! The parallel build also times a one-thread pool, so a single run shows both sides.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use paracalc::noise::{enhanced_noise, sample_white_noise, wick_mc_estimate, Mollifier};
use paracalc::nonlinear::nl_para_lt;
use paracalc::para::resonant;
use paracalc::synth::synthesize_holder;
use paracalc::{EtaGrid, Grid, ParamField};

const MODE: &str = if cfg!(feature = "parallel") { "parallel" } else { "sequential" };

#[cfg(feature = "parallel")]
type Pool = rayon::ThreadPool;
#[cfg(not(feature = "parallel"))]
type Pool = ();

#[cfg(feature = "parallel")]
fn within<T: Send>(pool: Option<&Pool>, f: impl FnOnce() -> T + Send) -> T {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn within<T: Send>(_pool: Option<&Pool>, f: impl FnOnce() -> T + Send) -> T {
    f()
}

fn workloads(c: &mut Criterion, label: &str, pool: Option<&Pool>) {
    let grid = Grid::new(128).unwrap();
    let eta = EtaGrid::new(0.5, 5).unwrap();
    let f = synthesize_holder(grid, 0.8, 1);
    let g = synthesize_holder(grid, -1.2, 2);
    let xi = sample_white_noise(grid, 3);
    let h = ParamField::power(eta.clone(), synthesize_holder(grid, 1.0, 4), -1);
    let modulation = f.map(|v| 0.75 + 0.25 * v.sin());

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("resonant", label), |b| b.iter(|| within(pool, || resonant(&f, &g))));
    group.bench_function(BenchmarkId::new("nl_para_lt", label), |b| b.iter(|| within(pool, || nl_para_lt(&modulation, &h).unwrap())));
    group.bench_function(BenchmarkId::new("enhanced_noise", label), |b| {
        b.iter(|| within(pool, || enhanced_noise(&xi, 0.125, Mollifier::Gaussian, &eta, 3).unwrap()))
    });
    group.bench_function(BenchmarkId::new("wick_mc_16", label), |b| {
        b.iter(|| within(pool, || wick_mc_estimate(16, 0.125, 1.0, grid, Mollifier::Gaussian, 5).unwrap()))
    });
    group.finish();
}

fn bench_kernels(c: &mut Criterion) {
    workloads(c, MODE, None);
    #[cfg(feature = "parallel")]
    {
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        workloads(c, "one-thread-pool", Some(&single));
    }
}

criterion_group!(benches, bench_kernels);
criterion_main!(benches);
