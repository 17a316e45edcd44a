use criterion::{black_box, criterion_group, criterion_main, Criterion};

use kvariant_bench::{kloosterman, kloosterman_polytope};
use kvariant_core::diagonal::orbit_slopes;
use kvariant_core::gf::{FieldCtx, FieldElement, FieldOptions};
use kvariant_core::hodge::weight_numbers;
use kvariant_core::zeta::{newton_polygon, trace_counts, EngineConfig};

fn field_arithmetic(c: &mut Criterion) {
    let ctx = FieldCtx::new(2, 15, FieldOptions::default()).unwrap();
    let x = ctx.generator();
    c.bench_function("gf 2^15 mul x1000", |b| {
        b.iter(|| {
            let mut acc = FieldElement::ONE;
            for _ in 0..1000 {
                acc = ctx.mul(acc, x);
            }
            black_box(acc)
        })
    });
    c.bench_function("gf 2^15 trace x1000", |b| {
        b.iter(|| {
            let mut acc = 0u32;
            let mut e = x;
            for _ in 0..1000 {
                acc = acc.wrapping_add(ctx.trace(e));
                e = ctx.mul(e, x);
            }
            black_box(acc)
        })
    });
}

fn point_counting(c: &mut Criterion) {
    let cfg = EngineConfig::default();
    let f = kloosterman(&[3, 3], 2);
    let ctx = cfg.field(2, 12).unwrap();
    c.bench_function("trace_counts K(3,3) over F_2^12", |b| {
        b.iter(|| black_box(trace_counts(&f, 1, &ctx, &cfg).unwrap()))
    });
    let g = kloosterman(&[2, 2], 2);
    c.bench_function("newton_polygon K(2,2) p=3", |b| {
        b.iter(|| black_box(newton_polygon(&g, 3, 1, &cfg).unwrap()))
    });
}

fn combinatorics(c: &mut Criterion) {
    let delta = kloosterman_polytope(&[4, 3, 2], 3);
    c.bench_function("weight_numbers K^3(4,3,2)", |b| {
        b.iter(|| black_box(weight_numbers(&delta, 3 * delta.denominator() as usize).unwrap()))
    });
    let m = vec![vec![5, 0, 0], vec![0, 7, 0], vec![0, 0, 9]];
    c.bench_function("orbit_slopes diag(5,7,9) p=11", |b| {
        b.iter(|| black_box(orbit_slopes(&m, 11).unwrap()))
    });
}

criterion_group!(benches, field_arithmetic, point_counting, combinatorics);
criterion_main!(benches);
