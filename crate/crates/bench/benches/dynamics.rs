//! Single steps of the chains and the exact coupling distribution.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use kempeflip::chains::{flip_step, glauber_step, seeded_rng, FlipSampler};
use kempeflip::coupling::{greedy_coupling_distribution, CouplingSampler};
use kempeflip::harness::construct_g2;
use kempeflip::{Preset, Rational};
use kempeflip_bench::instance;

fn chain_steps(c: &mut Criterion) {
    let p = Preset::VigodaEq11.params::<f64>();
    let mut group = c.benchmark_group("chain-step");
    for n in [64, 1024] {
        let inst = instance(n, 6, 1);
        let k = inst.sigma.k();
        group.bench_with_input(BenchmarkId::new("flip", n), &inst, |b, inst| {
            let mut rng = seeded_rng(0, 0);
            b.iter(|| flip_step(&inst.graph, black_box(&inst.sigma), &p, &mut rng))
        });
        group.bench_with_input(BenchmarkId::new("flip-in-place", n), &inst, |b, inst| {
            let mut rng = seeded_rng(0, 0);
            let mut sampler = FlipSampler::new(&inst.graph);
            let mut colors = inst.sigma.as_slice().to_vec();
            b.iter(|| sampler.step(black_box(&mut colors), k, &p, &mut rng))
        });
        group.bench_with_input(BenchmarkId::new("glauber", n), &inst, |b, inst| {
            let mut rng = seeded_rng(0, 0);
            b.iter(|| glauber_step(&inst.graph, black_box(&inst.sigma), &mut rng))
        });
    }
    group.finish();
}

fn coupling(c: &mut Criterion) {
    let inst = construct_g2(12, 21).expect("even degree");
    let pair = inst.pair().expect("neighboring");
    let mut group = c.benchmark_group("coupling");
    group.bench_function("distribution-f64", |b| {
        let p = Preset::CmEq12.params::<f64>();
        b.iter(|| greedy_coupling_distribution(black_box(&pair), &p))
    });
    group.bench_function("distribution-exact", |b| {
        let p = Preset::CmEq12.exact();
        b.iter(|| greedy_coupling_distribution::<Rational>(black_box(&pair), &p))
    });
    group.bench_function("sampled-step", |b| {
        let p = Preset::CmEq12.params::<f64>();
        let mut sampler = CouplingSampler::new(&inst.graph);
        let mut rng = seeded_rng(0, 0);
        b.iter(|| sampler.step(black_box(&pair), &p, &mut rng))
    });
    group.finish();
}

criterion_group!(benches, chain_steps, coupling);
criterion_main!(benches);
