use criterion::{black_box, criterion_group, criterion_main, Criterion};
use pertlag_core::orthopoly::{build_system, FiniteCell};
use pertlag_core::painleve::integrate;
use pertlag_core::{Decimal, MomentTable, PrecisionCtx, WeightParams};

fn dec(s: &str) -> Decimal {
    s.parse().expect("literal decimal")
}

fn moments(c: &mut Criterion) {
    let params = WeightParams::parse("1.5", "0.7").unwrap();
    let ctx = PrecisionCtx::with_bits(512).unwrap();
    c.bench_function("moment_table_j0_80_512bits", |b| {
        b.iter(|| MomentTable::build(black_box(&params), 0, 80, &ctx).unwrap())
    });
}

fn hankel(c: &mut Criterion) {
    let params = WeightParams::parse("1", "0.5").unwrap();
    let mut group = c.benchmark_group("hankel");
    for n in [10usize, 40] {
        let ctx = PrecisionCtx::with_bits(128 + 12 * n as u32).unwrap();
        group.bench_function(format!("factor_and_cell_n{n}"), |b| {
            b.iter(|| {
                let sys = build_system(n + 2, black_box(&params), &ctx).unwrap();
                FiniteCell::from_system(&sys, n).unwrap()
            })
        });
    }
    group.finish();
}

fn painleve(c: &mut Criterion) {
    let ctx = PrecisionCtx::with_bits(PrecisionCtx::MIN_BITS).unwrap();
    let mut group = c.benchmark_group("painleve");
    group.sample_size(10);
    group.bench_function("integrate_alpha1_smax100_tol1e-25", |b| {
        b.iter(|| integrate(&dec("1"), black_box(&dec("100")), &dec("1e-25"), &ctx).unwrap())
    });
    group.finish();
}

criterion_group!(benches, moments, hankel, painleve);
criterion_main!(benches);
