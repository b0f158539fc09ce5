//! Filter invariants, the naive Bayes harness and the data generators.

use bayesmi::dataio::{generate, generate_stream, SyntheticSpec, StreamSpec};
use bayesmi::distfit::Family;
use bayesmi::filters::{decide, ff_equivalent_threshold, select, FilterConfig, FilterKind, Verdict};
use bayesmi::moments::{self, empirical_mi, mutual_information};
use bayesmi::nb::{paired_t_test, NaiveBayesState};
use bayesmi::{CountTable, PriorSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_table() -> impl Strategy<Value = CountTable> {
    (2usize..=3, 2usize..=3).prop_flat_map(|(r, s)| {
        prop::collection::vec(0u32..30, r * s)
            .prop_filter("nonempty", |c| c.iter().any(|&x| x > 0))
            .prop_map(move |c| CountTable::new(r, s, c.into_iter().map(f64::from).collect()).unwrap())
    })
}

fn config(kind: FilterKind, epsilon: f64, p_bar: f64) -> FilterConfig {
    FilterConfig {
        epsilon,
        p_bar,
        ..FilterConfig::new(kind)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn raising_p_bar_is_one_directional(t in small_table(), lo in 0.5f64..0.9, step in 0.01f64..0.09) {
        let hi = lo + step;
        let ff_lo = decide(&t, &config(FilterKind::FF, 0.003, lo)).unwrap().verdict;
        let ff_hi = decide(&t, &config(FilterKind::FF, 0.003, hi)).unwrap().verdict;
        prop_assert!(!(ff_lo == Verdict::Discard && ff_hi == Verdict::Include));
        let bf_lo = decide(&t, &config(FilterKind::BF, 0.003, lo)).unwrap().verdict;
        let bf_hi = decide(&t, &config(FilterKind::BF, 0.003, hi)).unwrap().verdict;
        prop_assert!(!(bf_lo == Verdict::Include && bf_hi == Verdict::Discard));
    }

    #[test]
    fn f_include_set_shrinks_with_epsilon(tables in prop::collection::vec(small_table(), 1..6), e in 1e-4f64..0.1) {
        let tables: Vec<CountTable> = {
            let s = tables[0].cols();
            tables.into_iter().filter(|t| t.cols() == s).collect()
        };
        let wide = select(&tables, &config(FilterKind::F, e, 0.95)).unwrap();
        let narrow = select(&tables, &config(FilterKind::F, 2.0 * e, 0.95)).unwrap();
        prop_assert!(narrow.iter().all(|a| wide.contains(a)));
    }

    #[test]
    fn decisions_are_deterministic(t in small_table()) {
        for kind in FilterKind::ALL {
            let c = FilterConfig::new(kind);
            prop_assert_eq!(decide(&t, &c).unwrap(), decide(&t, &c).unwrap());
        }
    }

    #[test]
    fn ff_never_includes_what_bf_discards(t in small_table()) {
        // with p_bar > 1/2, p(I > eps) > p_bar implies p(I < eps) < p_bar
        let ff = decide(&t, &FilterConfig::new(FilterKind::FF)).unwrap();
        let bf = decide(&t, &FilterConfig::new(FilterKind::BF)).unwrap();
        prop_assert!(!(ff.verdict == Verdict::Include && bf.verdict == Verdict::Discard));
    }

    #[test]
    fn classifier_counts_are_conserved(
        rows in prop::collection::vec((prop::collection::vec(prop::option::of(0usize..3), 4), 0usize..2), 1..60)
    ) {
        let mut s = NaiveBayesState::new(&[3, 3, 3, 3], 2, 1.0).unwrap();
        for (x, y) in &rows {
            s.update(x, *y).unwrap();
            let p = s.predict(x, &[0, 1, 2, 3]).unwrap();
            prop_assert!((p.posterior.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        prop_assert_eq!(s.class_counts().iter().sum::<f64>(), rows.len() as f64);
        for a in 0..4 {
            let observed = rows.iter().filter(|(x, _)| x[a].is_some()).count() as f64;
            let table = s.attribute_table(a, PriorSpec::none());
            let total: f64 = (0..3).flat_map(|v| (0..2).map(move |c| (v, c))).map(|(v, c)| s.count(a, v, c)).sum();
            prop_assert_eq!(total, observed);
            if let Ok(Some(t)) = table {
                prop_assert_eq!(t.total(), rows.len() as f64);
            }
        }
    }
}

#[test]
fn gaussian_ff_mimics_f_at_shifted_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut agree, mut total) = (0, 0);
    let eps = 0.003;
    while total < 400 {
        let (r, s) = (rng.random_range(2..4), rng.random_range(2..4));
        let strength: f64 = rng.random_range(0.0..0.3);
        let n = rng.random_range(30..300);
        let mut counts = vec![1.0; r * s];
        for _ in 0..n {
            let i = rng.random_range(0..r);
            let j = if rng.random::<f64>() < strength { i % s } else { rng.random_range(0..s) };
            counts[i * s + j] += 1.0;
        }
        let t = CountTable::new(r, s, counts).unwrap();
        let summary = moments::summarize(&t, PriorSpec::none()).unwrap();
        let eps_prime = ff_equivalent_threshold(&summary, eps);
        let sd = summary.variance().sqrt();
        if (summary.empirical_mi - eps_prime).abs() <= 0.1 * sd {
            continue;
        }
        total += 1;
        let ff = decide(
            &t,
            &FilterConfig {
                epsilon: eps,
                p_bar: 0.977,
                kind: FilterKind::FF,
                family: Family::Gaussian,
                prior: PriorSpec::none(),
            },
        )
        .unwrap();
        let f_include = summary.empirical_mi > eps_prime;
        agree += usize::from((ff.verdict == Verdict::Include) == f_include);
    }
    assert!(agree as f64 >= 0.95 * total as f64, "{agree}/{total}");
}

#[test]
fn independent_attributes_eventually_rejected_by_ff() {
    let mut empty = 0;
    for seed in 0..10 {
        let tables: Vec<CountTable> = (0..5)
            .map(|a| generate(&SyntheticSpec::independent(3, 2, 20_000, seed * 10 + a)).unwrap().to_table().unwrap())
            .collect();
        empty += usize::from(select(&tables, &FilterConfig::new(FilterKind::FF)).unwrap().is_empty());
    }
    assert!(empty >= 9, "{empty}/10");
}

#[test]
fn filters_agree_with_the_truth_for_large_samples() {
    let dependent = vec![0.3, 0.1, 0.1, 0.5];
    assert!(mutual_information(&dependent, 2, 2) > 0.05);
    for (pi, truth) in [(dependent, Verdict::Include), (vec![0.25; 4], Verdict::Discard)] {
        let t = generate(&SyntheticSpec::new(2, 2, 200_000, pi, 3)).unwrap().to_table().unwrap();
        for kind in FilterKind::ALL {
            assert_eq!(decide(&t, &FilterConfig::new(kind)).unwrap().verdict, truth, "{kind}");
        }
    }
}

#[test]
fn selection_sizes_are_nested_on_average() {
    let mut sizes = [0usize; 3];
    for seed in 0..20 {
        let ds = generate_stream(&StreamSpec {
            n: 150,
            strength: 0.15,
            seed,
            ..StreamSpec::default()
        })
        .unwrap();
        let tables: Vec<CountTable> = (0..ds.attributes.len())
            .map(|a| ds.attribute_class_table(a).unwrap())
            .collect();
        for (k, kind) in FilterKind::ALL.iter().enumerate() {
            sizes[k] += select(&tables, &FilterConfig::new(*kind)).unwrap().len();
        }
    }
    let [f, ff, bf] = sizes;
    assert!(ff <= f && f <= bf, "FF {ff}, F {f}, BF {bf}");
}

#[test]
fn t_test_false_positive_rate_is_calibrated() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let reps = 1000;
    let mut hits = 0;
    for _ in 0..reps {
        let a: Vec<bool> = (0..1000).map(|_| rng.random::<f64>() < 0.7).collect();
        let b: Vec<bool> = (0..1000).map(|_| rng.random::<f64>() < 0.7).collect();
        hits += usize::from(paired_t_test(&a, &b).unwrap().significant);
    }
    let rate = hits as f64 / reps as f64;
    // binomial SE at 5% over 1000 reps is about 0.7%
    assert!((0.03..=0.07).contains(&rate), "rate {rate}");
}

#[test]
fn generator_frequencies_match_chances() {
    let pi = [0.1, 0.2, 0.05, 0.15, 0.3, 0.2];
    let n = 2000;
    let mut totals = [0.0; 6];
    for seed in 0..100 {
        let t = generate(&SyntheticSpec::new(2, 3, n, pi.to_vec(), seed)).unwrap().to_table().unwrap();
        for (acc, c) in totals.iter_mut().zip(t.counts()) {
            *acc += c;
        }
    }
    let draws = (100 * n) as f64;
    for (k, &p) in pi.iter().enumerate() {
        let se = (p * (1.0 - p) / draws).sqrt();
        assert!((totals[k] / draws - p).abs() < 3.0 * se, "cell {k}");
    }
}

#[test]
fn independent_generator_bias_scale() {
    // empirical MI under independence averages (r-1)(s-1)/(2n)
    let (r, s, n) = (3, 4, 10_000);
    let want = ((r - 1) * (s - 1)) as f64 / (2.0 * n as f64);
    let mean: f64 = (0..50)
        .map(|seed| empirical_mi(&generate(&SyntheticSpec::independent(r, s, n, seed)).unwrap().to_table().unwrap()).unwrap())
        .sum::<f64>()
        / 50.0;
    assert!((mean / want - 1.0).abs() < 0.3, "{mean} vs {want}");
}
