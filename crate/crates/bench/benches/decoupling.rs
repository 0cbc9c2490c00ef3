use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use perdec_bench::repeat_period;
use perdec_core::cyclic::cyclic_hermite;
use perdec_core::fixtures::{example1_stabilized, example2, example3};
use perdec_core::{build_cyclic, decouple_nonsquare, decouple_square, hermite_form_s, NonsquareOptions};

fn cyclic(c: &mut Criterion) {
    let mut group = c.benchmark_group("cyclic_transfer");
    for k in [1, 2, 3] {
        let sys = repeat_period(&example2(), k);
        group.bench_with_input(BenchmarkId::from_parameter(sys.period()), &sys, |b, sys| {
            b.iter(|| build_cyclic(black_box(sys), 0))
        });
    }
    group.finish();
}

fn hermite(c: &mut Criterion) {
    let mut group = c.benchmark_group("cyclic_hermite");
    for k in [1, 2] {
        let bundle = build_cyclic(&repeat_period(&example1_stabilized(), k), 0);
        group.bench_with_input(BenchmarkId::from_parameter(bundle.period), &bundle, |b, bundle| {
            b.iter(|| cyclic_hermite(black_box(bundle)).unwrap())
        });
    }
    group.finish();
    let w = build_cyclic(&example1_stabilized(), 0).w_bar;
    c.bench_function("hermite_form_s/example1", |b| b.iter(|| hermite_form_s(black_box(&w)).unwrap()));
}

fn synthesis(c: &mut Criterion) {
    let square = example1_stabilized();
    c.bench_function("decouple_square/example1", |b| {
        b.iter(|| decouple_square(black_box(&square), 0, None).unwrap())
    });
    let opts = NonsquareOptions::default();
    for (name, sys) in [("example2", example2()), ("example3", example3())] {
        c.bench_function(&format!("decouple_nonsquare/{name}"), |b| {
            b.iter(|| decouple_nonsquare(black_box(&sys), &opts).unwrap())
        });
    }
}

fn verification(c: &mut Criterion) {
    let closed = decouple_nonsquare(&example3(), &NonsquareOptions::default()).unwrap().closed;
    c.bench_function("verify_decoupled/example3", |b| b.iter(|| black_box(&closed).verify_decoupled(None)));
}

criterion_group!(benches, cyclic, hermite, synthesis, verification);
criterion_main!(benches);
