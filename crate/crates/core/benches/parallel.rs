//! Compares the data-parallel hot loops against single-threaded execution.
//!
//! With the default `parallel` feature the same benchmark body runs once on
//! the global rayon pool and once inside a one-thread pool; build with
//! `--no-default-features` to measure the plain sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use widthlab::balls::{BallIntersection, WidthKind, WidthQuery};
use widthlab::exponents::Exponent;
use widthlab::gluskin::gluskin_lower_bound;
use widthlab::harness::{self, VerifyConfig};
use widthlab::oracle::{gelfand_estimate, OracleBudget};

fn sweep_query(dim: usize) -> WidthQuery {
    let set = BallIntersection::new(
        dim,
        vec![
            widthlab::balls::Ball::new(Exponent::new(1.5).unwrap(), 4.0).unwrap(),
            widthlab::balls::Ball::new(Exponent::new(4.0).unwrap(), 1.0).unwrap(),
        ],
    )
    .unwrap()
    .canonicalize();
    WidthQuery::new(set, dim / 16, Exponent::TWO, WidthKind::Gelfand).unwrap()
}

fn run_modes<F: Fn() + Sync>(c: &mut Criterion, name: &str, f: F) {
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    #[cfg(feature = "parallel")]
    {
        group.bench_function(BenchmarkId::new("threads", "all"), |b| b.iter(&f));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        group.bench_function(BenchmarkId::new("threads", "1"), |b| {
            b.iter(|| pool.install(&f))
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function(BenchmarkId::new("threads", "sequential"), |b| b.iter(&f));
    group.finish();
}

fn bench_spike_sweep(c: &mut Criterion) {
    let query = sweep_query(4096);
    run_modes(c, "spike_sweep_4096", || {
        let cert = gluskin_lower_bound(&query);
        assert!(cert.lower_bound >= 0.0);
    });
}

fn bench_quad_sampling(c: &mut Criterion) {
    let cfg = VerifyConfig { quad_samples: 20_000, ..Default::default() };
    run_modes(c, "quad_bound_sampling_20k", || {
        let report = harness::quad_bound_suite(&cfg);
        assert!(report.passed);
    });
}

fn bench_oracle_restarts(c: &mut Criterion) {
    let query = sweep_query(8);
    let budget = OracleBudget { outer_restarts: 8, outer_iters: 16, ..OracleBudget::quick() };
    run_modes(c, "oracle_restarts_n8", || {
        let est = gelfand_estimate(&query, 7, &budget).unwrap();
        assert!(est.value > 0.0);
    });
}

criterion_group!(benches, bench_spike_sweep, bench_quad_sampling, bench_oracle_restarts);
criterion_main!(benches);
