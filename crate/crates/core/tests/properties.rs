use cvec_core::coxeter::{is_reflection, reflections_along, run_walk};
use cvec_core::curves::{crossing_word, FamilyLabeling, Point, Polyline};
use cvec_core::fork::random_fork_preserving_sequence;
use cvec_core::{
    find_point_of_return, fork_linear_ordering, gim_from_ordering, is_admissible, mutate_gim,
    pi_matrix, random_fork, reduce, ExchangeMatrix, FramedSeed, Gim, IntMatrix, MutationSequence,
    Word,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sgn(x: &BigInt) -> BigInt {
    x.signum()
}

/// GIM mutation written with `ε = -sgn(c_k)` and the `max(b_ik b_kj, 0)` rule.
fn mutate_gim_epsilon_form(g: &Gim, seed: &FramedSeed, k: usize) -> IntMatrix {
    let n = g.n();
    let b = &seed.b;
    let eps = -BigInt::from(seed.c_sign(k).unwrap());
    let a = &g.a;
    let mut out = a.clone();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            out[(i, j)] = if j == k {
                &eps * sgn(b.get(i, k)) * &a[(i, k)]
            } else if i == k {
                -&eps * sgn(b.get(k, j)) * &a[(k, j)]
            } else {
                let m = (b.get(i, k) * b.get(k, j)).max(BigInt::zero());
                &a[(i, j)] - sgn(&(&a[(i, k)] * &a[(k, j)])) * m
            };
        }
    }
    out
}

/// Cancels one adjacent equal pair at a time until none remain.
fn naive_reduce(w: &[usize]) -> Vec<usize> {
    let mut v = w.to_vec();
    while let Some(p) = v.windows(2).position(|x| x[0] == x[1]) {
        v.drain(p..p + 2);
    }
    v
}

fn skew(n: usize, max: i64) -> impl Strategy<Value = ExchangeMatrix> {
    proptest::collection::vec(-max..=max, n * (n - 1) / 2).prop_map(move |vals| {
        let mut rows = vec![vec![0i64; n]; n];
        let mut it = vals.into_iter();
        for i in 0..n {
            for j in i + 1..n {
                let v = it.next().unwrap();
                rows[i][j] = v;
                rows[j][i] = -v;
            }
        }
        ExchangeMatrix::from_i64(&rows)
    })
}

fn complete_skew(n: usize, max: i64) -> impl Strategy<Value = ExchangeMatrix> {
    skew(n, max).prop_filter("complete", |b| b.is_complete())
}

fn reduced_sequence(n: usize, max_len: usize) -> impl Strategy<Value = MutationSequence> {
    proptest::collection::vec(0..n, 0..=max_len).prop_map(|v| {
        let mut w = MutationSequence::default();
        for k in v {
            if w.last() != Some(k) {
                w.push(k);
            }
        }
        w
    })
}

/// A random fork with a fork-preserving walk.
fn fork_walk() -> impl Strategy<Value = (ExchangeMatrix, MutationSequence)> {
    (3usize..=5, 3u32..=7, any::<u64>(), 1usize..=8).prop_map(|(n, mw, s, len)| {
        let b = random_fork(n, mw, s).unwrap();
        let r = find_point_of_return(&b).unwrap().point_of_return;
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let w = random_fork_preserving_sequence(&mut rng, n, r, len);
        (b, w)
    })
}

fn random_gim(n: usize) -> impl Strategy<Value = Gim> {
    proptest::collection::vec(-6i64..=6, n * (n - 1) / 2).prop_map(move |vals| {
        let mut a = IntMatrix::identity(n);
        let mut it = vals.into_iter();
        for i in 0..n {
            a[(i, i)] = BigInt::from(2);
            for j in i + 1..n {
                let v = BigInt::from(it.next().unwrap());
                a[(i, j)] = v.clone();
                a[(j, i)] = v;
            }
        }
        Gim {
            a,
            origin_ordering: None,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn mutation_is_an_involution(b in (2usize..=5).prop_flat_map(|n| (skew(n, 3), reduced_sequence(n, 5), 0..n))) {
        let (b, w, k) = b;
        let seed = cvec_core::apply_sequence(&b, &w).unwrap();
        let back = seed.mutate(k).unwrap().mutate(k).unwrap();
        prop_assert_eq!(&back.b, &seed.b);
        prop_assert_eq!(&back.c, &seed.c);
        prop_assert_eq!(b.mutate(k).unwrap().mutate(k).unwrap(), b);
    }

    #[test]
    fn gim_mutation_is_reversible(x in (3usize..=5).prop_flat_map(|n| (complete_skew(n, 4), reduced_sequence(n, 3), 0..n))) {
        let (b, w, k) = x;
        let ord = cvec_core::LinearOrdering::identity(b.n());
        let Ok((g, seed)) = cvec_core::apply_gim_sequence(&b, &ord, &w) else {
            // The walk left the complete quivers.
            return Ok(());
        };
        prop_assume!(seed.b.is_complete());
        let g1 = mutate_gim(&g, &seed, k).unwrap();
        let seed1 = seed.mutate(k).unwrap();
        prop_assume!(seed1.b.is_complete());
        prop_assert_eq!(mutate_gim(&g1, &seed1, k).unwrap(), g);
    }

    #[test]
    fn gim_mutation_forms_agree_on_fork_walks((b, w) in fork_walk()) {
        let cert = find_point_of_return(&b).unwrap();
        let ord = fork_linear_ordering(&cert, &b).unwrap();
        let mut g = gim_from_ordering(&b, &ord).unwrap();
        let mut seed = FramedSeed::new(b);
        for &k in w.indices() {
            let next = mutate_gim(&g, &seed, k).unwrap();
            prop_assert_eq!(&next.a, &mutate_gim_epsilon_form(&g, &seed, k));
            seed = seed.mutate(k).unwrap();
            g = next;
            prop_assert!(is_admissible(&g, &seed.b).unwrap());
        }
    }

    #[test]
    fn reduce_matches_naive_cancellation(letters in proptest::collection::vec(0usize..4, 0..40)) {
        let w = Word(letters.clone());
        let r = reduce(&w);
        let naive = naive_reduce(&letters);
        prop_assert_eq!(r.letters(), naive.as_slice());
        prop_assert!(r.is_reduced());
        prop_assert_eq!(reduce(&r), r.clone());
        prop_assert!(w.times(&w.reversed()).is_empty());
    }

    #[test]
    fn generator_matrices_are_involutions(g in (2usize..=5).prop_flat_map(random_gim), i in 0usize..5) {
        let n = g.n();
        let i = i % n;
        let s = pi_matrix(&g, i);
        prop_assert_eq!(s.mul(&s).unwrap(), IntMatrix::identity(n));
        // The symmetric form is preserved.
        let sas = s.mul(&g.a).unwrap().mul(&s.transpose()).unwrap();
        prop_assert_eq!(sas, g.a.clone());
    }

    #[test]
    fn json_round_trips(b in (2usize..=5).prop_flat_map(|n| (skew(n, 9), reduced_sequence(n, 6)))) {
        let (b, w) = b;
        let js = serde_json::to_string(&b).unwrap();
        prop_assert_eq!(serde_json::from_str::<ExchangeMatrix>(&js).unwrap(), b.clone());
        let js = serde_json::to_string(&w).unwrap();
        prop_assert_eq!(serde_json::from_str::<MutationSequence>(&js).unwrap(), w.clone());
        let seed = cvec_core::apply_sequence(&b, &w).unwrap();
        let js = serde_json::to_string(&seed).unwrap();
        prop_assert_eq!(serde_json::from_str::<FramedSeed>(&js).unwrap(), seed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fork_walk_invariants((b, w) in fork_walk()) {
        let t = reflections_along(&b, &w).unwrap();
        for r in &t.refs {
            prop_assert!(is_reflection(r.word()));
        }
        let cert = find_point_of_return(&b).unwrap();
        let ord = fork_linear_ordering(&cert, &b).unwrap();
        let state = run_walk(&b, &ord, &w).unwrap();
        prop_assert_eq!(state.gram_violation(), None);
        prop_assert!(state.l_matrix().equal_up_to_row_sign(&state.l_matrix_from_words()));
        // Every c-vector stays sign-coherent and nonzero.
        prop_assert!(state.seed.sign_vector().is_ok());
    }

    #[test]
    fn reversed_curves_have_reversed_words(
        pts in proptest::collection::vec((-20i64..=20, -20i64..=20), 1..5),
        end in (-3i64..=3, -3i64..=3),
    ) {
        let lab: FamilyLabeling = "2,1,3".parse().unwrap();
        let mut points = vec![Point::int(0, 0)];
        for (x, y) in pts {
            points.push(Point::new(
                BigRational::new(BigInt::from(x), BigInt::from(7)),
                BigRational::new(BigInt::from(y), BigInt::from(11)),
            ));
        }
        points.push(Point::int(end.0, end.1));
        let p = Polyline::new(points);
        let forward = crossing_word(&p, &lab);
        prop_assume!(forward.is_ok());
        let back = crossing_word(&p.reversed(), &lab).unwrap();
        prop_assert_eq!(back, forward.unwrap().reversed());
    }
}
