use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use veq_core::coef::int;
use veq_core::ir::word_to_tree;
use veq_core::quad::{self, Assignment, Oracle};
use veq_core::random::{analytic_palette, polynomial_palette, Gen};
use veq_core::shuffle::shuffle;
use veq_core::{linearize, CoefFn, EvalEnv, Op, VolterraOpSpec};

fn ops() -> Vec<Op> {
    vec![
        Op::new(VolterraOpSpec::new("P", int(0), CoefFn::exp(CoefFn::X.neg()), CoefFn::exp(CoefFn::X))),
        Op::new(VolterraOpSpec::new("Q", int(0), CoefFn::one().add(&CoefFn::X), CoefFn::one())),
    ]
}

fn algebra(c: &mut Criterion) {
    let mut g = Gen::new(1, ops(), &["y", "z"], polynomial_palette());
    c.bench_function("shuffle 3x3 words", |b| {
        b.iter_batched(|| (g.tensor(3, 3), g.tensor(3, 3)), |(u, v)| shuffle(&u, &v), BatchSize::SmallInput)
    });

    let mut g = Gen::new(2, ops(), &["y", "z"], polynomial_palette());
    g.max_monomials = 8;
    c.bench_function("linearize depth 3", |b| {
        b.iter_batched(|| g.operated(3, 2), |e| linearize(&e, 8).unwrap(), BatchSize::SmallInput)
    });

    let mut g = Gen::new(3, ops(), &["y", "z"], polynomial_palette());
    c.bench_function("word to tree", |b| {
        b.iter_batched(|| g.operated(3, 3), |e| word_to_tree(&e), BatchSize::SmallInput)
    });
}

fn quadrature(c: &mut Criterion) {
    let env = EvalEnv::default();
    let pool = quad::test_pool();
    let sigma = Assignment::from([("y".into(), pool[1].clone()), ("z".into(), pool[2].clone())]);
    let mut g = Gen::new(4, ops(), &["y", "z"], analytic_palette());
    let words: Vec<_> = (1..=3).map(|n| g.word(n)).collect();
    for w in &words {
        let name = format!("grid word length {}", w.len());
        c.bench_function(&name, |b| b.iter(|| quad::eval_word(black_box(w), &sigma, 1.3, &env).unwrap()));
    }
    let name = format!("nested word length {}", words[1].len());
    c.bench_function(&name, |b| b.iter(|| quad::naive_word(black_box(&words[1]), &sigma, 1.3, &env).unwrap()));

    let mut g = Gen::new(5, ops(), &["y", "z"], analytic_palette());
    g.max_monomials = 6;
    let e = g.operated(2, 2);
    let t = linearize(&e, 8).unwrap();
    let sigmas = [sigma];
    c.bench_function("check identity", |b| {
        b.iter(|| quad::check_identity(&e, &t, &sigmas, &[0.5, 1.5], 1e-6, &env, Oracle::Grid))
    });
}

criterion_group!(benches, algebra, quadrature);
criterion_main!(benches);
