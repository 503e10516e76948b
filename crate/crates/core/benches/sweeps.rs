//! Data-parallel workloads on a one-thread pool versus the default pool.
//! Built without the `parallel` feature, both runs take the sequential path.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPool;

use designforge::kramer_mesner::{km_search, MultiplierGroup, SolveBudget};
use designforge::ooc::{maximal_ooc_p_squared, verify_ooc};
use designforge::{admissible_params, exhaustive_search, ExhaustiveBudget, PpsSpec};

fn pools() -> Vec<(String, ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    let n = all.current_num_threads();
    vec![("single".into(), one), (format!("default-{n}"), all)]
}

fn sweeps(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweeps");
    g.sample_size(10).measurement_time(Duration::from_secs(5));
    let aps39 = PpsSpec::aps(39, 13, 13).unwrap();
    let ps133 = PpsSpec::ps(133).unwrap();
    let h133 = MultiplierGroup::generated_by(133, &[122]).unwrap();
    let aps91 = PpsSpec::aps(91, 13, 39).unwrap();
    let h91 = MultiplierGroup::plus_minus(91).unwrap();
    let code = maximal_ooc_p_squared(191, 5).unwrap();
    for (label, pool) in pools() {
        g.bench_with_input(
            BenchmarkId::new("exhaustive APS(39,13,13)", &label),
            &aps39,
            |b, s| {
                b.iter(|| {
                    pool.install(|| {
                        exhaustive_search(black_box(s), ExhaustiveBudget::default()).unwrap()
                    })
                })
            },
        );
        g.bench_with_input(
            BenchmarkId::new("km PS(133) <122>", &label),
            &ps133,
            |b, s| {
                b.iter(|| {
                    pool.install(|| {
                        km_search(&h133, black_box(s), SolveBudget::unlimited()).unwrap()
                    })
                })
            },
        );
        g.bench_with_input(
            BenchmarkId::new("km APS(91,13,39) {1,-1}", &label),
            &aps91,
            |b, s| {
                b.iter(|| {
                    pool.install(|| {
                        km_search(&h91, black_box(s), SolveBudget::unlimited()).unwrap()
                    })
                })
            },
        );
        g.bench_with_input(
            BenchmarkId::new("admissible v=7*23*47", &label),
            &7567u64,
            |b, &v| b.iter(|| pool.install(|| admissible_params(black_box(v)).unwrap())),
        );
        g.bench_with_input(
            BenchmarkId::new("verify (5*191^2,5,1)", &label),
            &code,
            |b, code| b.iter(|| pool.install(|| verify_ooc(black_box(code)))),
        );
    }
    g.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
