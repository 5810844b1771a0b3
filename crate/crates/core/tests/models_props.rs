use bdstein::distcore::tv_distance;
use bdstein::models::{
    birthday, hypergeometric, independent_bernoulli_sum, katz_family, kruns_law, kruns_law_bruteforce, kruns_moments,
    pbd_match_params, BernoulliProfile, BirthdayMode, KatzClass, MatchSource,
};
use bdstein::Exec;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transfer_map_equals_enumeration(n in 3u32..13, k in 2u32..5, p in 0.05f64..0.95) {
        prop_assume!(k < n);
        let a = kruns_law(n as u64, k, p).unwrap();
        let b = kruns_law_bruteforce(n, k, p, Exec::Sequential).unwrap();
        prop_assert!(a.approx_eq(&b, 1e-13));
        let m = kruns_moments(n as f64, k, p).unwrap();
        prop_assert!((a.mean() - m.lambda).abs() < 1e-11);
        prop_assert!((a.variance() - m.sigma2).abs() < 1e-10);
    }

    #[test]
    fn hypergeometric_is_symmetric(big_n in 2u64..40, m in 0u64..40, n in 0u64..40) {
        prop_assume!(m <= big_n && n <= big_n);
        let a = hypergeometric(big_n, m, n).unwrap();
        let b = hypergeometric(big_n, n, m).unwrap();
        prop_assert!(tv_distance(&a.law, &b.law) < 1e-13);
        prop_assert!((a.law.mean() - a.lambda).abs() < 1e-10);
        prop_assert!((a.law.variance() - a.sigma2).abs() < 1e-9);
    }

    #[test]
    fn bernoulli_sum_moments(probs in prop::collection::vec(0.0f64..1.0, 1..40)) {
        let prof = BernoulliProfile::new(&probs).unwrap();
        let w = independent_bernoulli_sum(&prof).unwrap();
        prop_assert!((w.mean() - prof.lambda()).abs() < 1e-11);
        prop_assert!((w.variance() - prof.variance()).abs() < 1e-10);
    }

    #[test]
    fn matching_satisfies_condition_a(probs in prop::collection::vec(0.02f64..0.6, 3..30)) {
        let prof = BernoulliProfile::new(&probs).unwrap();
        let m = pbd_match_params(MatchSource::Profile(&prof), 2).unwrap();
        prop_assert!(m.residuals.unwrap().iter().all(|r| *r <= 1e-9));
    }

    #[test]
    fn katz_binomial(n in 1u64..30, p in 0.05f64..0.95) {
        let a = -p / (1.0 - p);
        let b = (n as f64 + 1.0) * p / (1.0 - p);
        let (law, class, _) = katz_family(a, b).unwrap();
        prop_assert_eq!(class, KatzClass::Binomial);
        let direct = independent_bernoulli_sum(&BernoulliProfile::homogeneous(n, p).unwrap()).unwrap();
        prop_assert!(law.approx_eq(&direct, 1e-12));
    }
}

#[test]
fn birthday_enumeration_matches_closed_forms() {
    for (n, m, r) in [(4, 3, 0), (5, 3, 1), (5, 2, 4)] {
        let b = birthday(n, m, r, BirthdayMode::Enumerate, Exec::Sequential).unwrap();
        assert!(b.exact);
        assert!((b.law.mean() - b.lambda).abs() < 1e-12);
        assert!((b.law.variance() - b.variance).abs() < 1e-12);
    }
}

#[test]
fn birthday_monte_carlo_is_reproducible() {
    let mode = BirthdayMode::MonteCarlo { seed: 3, samples: 50_000 };
    let a = birthday(6, 5, 2, mode, Exec::Sequential).unwrap();
    let b = birthday(6, 5, 2, mode, Exec::Parallel).unwrap();
    assert_eq!(a.law, b.law);
    assert!(!a.exact);
    assert!((a.law.mean() - a.lambda).abs() < 0.05);
}
