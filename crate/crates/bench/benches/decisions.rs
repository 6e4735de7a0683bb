use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use genshift_core::catalog::{builtins, classify, mixed_piecewise};
use genshift_core::oracle::{crosscheck, enumerate_small_maps, CrosscheckOptions};
use genshift_core::specification::{build_tracing_point, decide_weak_spec};
use genshift_core::strobo::{build_rho, congruence_subsequence, decide_strobo};
use genshift_core::{Alphabet, Configuration, FunctionalMap, SequenceSpec, SpecInstance, Window};

fn classify_builtins(c: &mut Criterion) {
    let all = builtins();
    c.bench_function("classify builtins", |b| {
        b.iter(|| all.iter().map(|bi| classify(black_box(&bi.system))).collect::<Vec<_>>())
    });
}

fn small_tables(c: &mut Criterion) {
    let mut g = c.benchmark_group("decide all tables");
    for n in [3, 4] {
        let maps: Vec<FunctionalMap> = enumerate_small_maps(n).unwrap().collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &maps, |b, maps| {
            b.iter(|| maps.iter().filter(|m| decide_strobo(m).is_yes() && decide_weak_spec(m).is_no()).count())
        });
    }
    g.finish();
}

fn tracing(c: &mut Criterion) {
    let map = FunctionalMap::affine(1, 1);
    let h = Window::from_ints(&[0, 3, 7]).unwrap();
    let bin = Alphabet::binary();
    let segs: Vec<Configuration> = (0..4).map(|k| Configuration::constant(bin, k % 2).unwrap()).collect();
    let inst = SpecInstance::new(segs, vec![(0, 5), (14, 20), (30, 31), (40, 60)], h).unwrap();
    c.bench_function("tracing point, translation", |b| b.iter(|| build_tracing_point(&map, black_box(&inst), 0).unwrap()));
}

fn subsequences(c: &mut Criterion) {
    let a = SequenceSpec::naturals(100_000);
    c.bench_function("congruence subsequence M=12", |b| b.iter(|| congruence_subsequence(black_box(&a), 12).unwrap()));
}

fn rho(c: &mut Criterion) {
    let a = SequenceSpec::naturals(2000);
    let mut g = c.benchmark_group("build rho");
    let cases = [
        ("negation", FunctionalMap::affine(-1, 0), vec![-2, 0, 3]),
        ("translation", FunctionalMap::affine(1, 1), vec![0, 4]),
        ("mixed", mixed_piecewise(), vec![0, -3, 2]),
    ];
    for (name, map, coords) in cases {
        let h = Window::from_ints(&coords).unwrap();
        g.bench_function(name, |b| b.iter(|| build_rho(&map, black_box(&a), &h).unwrap()));
    }
    g.finish();
}

fn crosscheck_three(c: &mut Criterion) {
    let mut g = c.benchmark_group("crosscheck");
    g.sample_size(10);
    g.bench_function("3 atoms", |b| b.iter(|| crosscheck(CrosscheckOptions::new(3, 0)).unwrap()));
    g.finish();
}

criterion_group!(benches, classify_builtins, small_tables, tracing, subsequences, rho, crosscheck_three);
criterion_main!(benches);
