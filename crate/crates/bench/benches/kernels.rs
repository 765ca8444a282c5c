use criterion::{black_box, criterion_group, criterion_main, Criterion};
use cvec_core::coxeter::{reflections_along, run_walk};
use cvec_core::fork::random_fork_preserving_sequence;
use cvec_core::{
    apply_sequence, curves_for_reflections, find_point_of_return, fixtures, fork_linear_ordering,
    random_fork, random_walk_campaign, reduce, CampaignConfig, FamilyLabeling, MutationSequence,
    Word,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Entry sizes grow doubly exponentially along this walk, so it stays short.
fn long_walk() -> MutationSequence {
    let v: Vec<usize> = (0..15).map(|i| i % 3).collect();
    MutationSequence::new(v)
}

fn mutation(c: &mut Criterion) {
    let w = long_walk();
    let q = fixtures::q233();
    c.bench_function("mutate q233 x15", |b| b.iter(|| apply_sequence(black_box(&q), &w).unwrap()));

    let f = random_fork(5, 7, 1).unwrap();
    let r = find_point_of_return(&f).unwrap();
    let ord = fork_linear_ordering(&r, &f).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fw = random_fork_preserving_sequence(&mut rng, 5, r.point_of_return, 12);
    c.bench_function("fork walk n=5 len=12 with GIM and L", |b| {
        b.iter(|| run_walk(black_box(&f), &ord, &fw).unwrap())
    });
}

fn words(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let w = Word((0..2000).map(|_| rng.gen_range(0..3)).collect());
    c.bench_function("reduce 2000 letters", |b| b.iter(|| reduce(black_box(&w))));
}

fn campaign(c: &mut Criterion) {
    let cfg = CampaignConfig::new(vec![3, 4, 5], 7, 8, 50, 3);
    let mut g = c.benchmark_group("campaign");
    g.sample_size(10);
    g.bench_function("50 trials", |b| b.iter(|| random_walk_campaign(black_box(&cfg)).unwrap()));
    g.finish();
}

fn curves(c: &mut Criterion) {
    let q = fixtures::q233();
    let t = reflections_along(&q, &"1,2".parse().unwrap()).unwrap();
    let lab: FamilyLabeling = "2,1,3".parse().unwrap();
    let mut g = c.benchmark_group("curves");
    g.sample_size(10);
    g.bench_function("q233 after [1,2]", |b| {
        b.iter(|| curves_for_reflections(black_box(&t.refs), &lab, 8).unwrap())
    });
    g.finish();
}

criterion_group!(benches, mutation, words, campaign, curves);
criterion_main!(benches);
