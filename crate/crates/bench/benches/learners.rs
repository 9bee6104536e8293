use std::hint::black_box;

use cmdp_lab::{
    build_q_class, dpl_erm, fqi, generate_expert_batch, generate_model_batch, select_model_mle, BatchRef,
    DataDistribution,
};
use cmdp_lab_bench::{dpl_lower, tree};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const SIZES: [usize; 3] = [10, 100, 1000];

fn erm(c: &mut Criterion) {
    let family = dpl_lower();
    let cmdp = family.instance(0);
    let mut group = c.benchmark_group("dpl_erm");
    for m in SIZES {
        let batch = generate_expert_batch(cmdp, family.expert(0), m, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &batch, |b, batch| {
            b.iter(|| dpl_erm(black_box(batch), family.policy_class()).unwrap())
        });
    }
    group.finish();
}

fn mle(c: &mut Criterion) {
    let family = tree(3, 4);
    let cmdp = family.instance(0);
    let models = family.model_class().expect("tree has a model class");
    let mu = DataDistribution::uniform(cmdp.num_states(), cmdp.num_actions());
    let mut group = c.benchmark_group("select_model_mle");
    for m in SIZES {
        let batch = generate_model_batch(cmdp, &mu, m, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &batch, |b, batch| {
            b.iter(|| select_model_mle(BatchRef::OneStep(black_box(batch)), models).unwrap())
        });
    }
    group.finish();
}

fn fitted_q(c: &mut Criterion) {
    let family = tree(3, 4);
    let cmdp = family.instance(0);
    let q_class = build_q_class(family.model_class().expect("tree has a model class")).unwrap();
    let mu = DataDistribution::uniform(cmdp.num_states(), cmdp.num_actions());
    let mut group = c.benchmark_group("fqi");
    for m in SIZES {
        let batch = generate_model_batch(cmdp, &mu, m, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &batch, |b, batch| {
            b.iter(|| fqi(black_box(batch), &q_class).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, erm, mle, fitted_q);
criterion_main!(benches);
