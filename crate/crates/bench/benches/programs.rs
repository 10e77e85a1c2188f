//! Building and solving programs of the LP family.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use kempeflip::lp::{build_lp, solve_lp, LpKind};
use kempeflip::Rational;

fn programs(c: &mut Criterion) {
    let mut group = c.benchmark_group("lp");
    group.sample_size(10);
    group.bench_function("build-lp2", |b| b.iter(|| build_lp(black_box(LpKind::Lp2), 6, 3)));
    let lp2 = build_lp(LpKind::Lp2, 6, 3).expect("valid sizes");
    group.bench_function("solve-lp2-f64", |b| b.iter(|| solve_lp::<f64>(black_box(&lp2))));
    let lp4 = build_lp(LpKind::Lp4, 6, 3).expect("valid sizes");
    group.bench_function("solve-lp4-exact", |b| b.iter(|| solve_lp::<Rational>(black_box(&lp4))));
    group.finish();
}

criterion_group!(benches, programs);
criterion_main!(benches);
