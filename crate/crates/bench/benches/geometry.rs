use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use pw_bench::{noncasimir_warped, poisson_x_space};
use pw_core::connection::{levi_civita, ricci_matrix_at, scalar_curvature};
use pw_core::sample::{sample_points, SampleSpec};
use pw_core::warped::verify_decomposition;
use pw_core::{Point, ScalarField};

fn bench_expr(c: &mut Criterion) {
    let vars: Vec<String> = vec!["x".into(), "y".into()];
    let text = "x^2 * sin(y) - 3/(x^2 + 2) + exp(x*y/4)";
    c.bench_function("parse", |b| {
        b.iter(|| ScalarField::parse(black_box(text), &vars).unwrap())
    });
    let f = ScalarField::parse(text, &vars).unwrap();
    c.bench_function("differentiate", |b| b.iter(|| f.differentiate("x")));
    let p = Point::from_pairs(&[("x", 0.7), ("y", -1.2)]);
    let d = f.differentiate("x");
    c.bench_function("evaluate derivative", |b| b.iter(|| d.evaluate(&p).unwrap()));
}

fn bench_connection(c: &mut Criterion) {
    let space = poisson_x_space();
    c.bench_function("levi_civita solve (2d)", |b| {
        b.iter(|| levi_civita(space.pi(), space.cometric()).unwrap())
    });
    let p = Point::from_pairs(&[("x", 1.3), ("y", 0.4)]);
    c.bench_function("ricci matrix at point", |b| {
        b.iter(|| ricci_matrix_at(space.connection(), space.cometric(), &p).unwrap())
    });
    c.bench_function("scalar curvature at point", |b| {
        b.iter(|| scalar_curvature(space.connection(), space.cometric(), &p).unwrap())
    });
}

fn bench_warped(c: &mut Criterion) {
    let w = noncasimir_warped();
    let points = sample_points(w.product().chart(), &SampleSpec::with_count_seed(10, 42));
    c.bench_function("verify decomposition (10 points)", |b| {
        b.iter(|| verify_decomposition(&w, &points, 1e-8).unwrap())
    });
}

criterion_group!(benches, bench_expr, bench_connection, bench_warped);
criterion_main!(benches);
