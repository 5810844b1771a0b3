use bdstein::distcore::{
    bernoulli_thin, binom, factorial_binomial_moment, make_dist, mixture, shift, size_bias, tv_distance,
    wasserstein_distance, FiniteDist,
};
use proptest::prelude::*;

fn law() -> impl Strategy<Value = FiniteDist> {
    (-3i64..4, prop::collection::vec(0.01f64..1.0, 1..10)).prop_map(|(o, m)| make_dist(o, m).unwrap())
}

fn binomial(n: u32, p: f64) -> FiniteDist {
    make_dist(0, (0..=n).map(|k| binom(n as i64, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)).collect())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tv_is_a_metric(a in law(), b in law(), c in law()) {
        let ab = tv_distance(&a, &b);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - tv_distance(&b, &a)).abs() < 1e-15);
        prop_assert!(tv_distance(&a, &a) < 1e-15);
        prop_assert!(ab <= tv_distance(&a, &c) + tv_distance(&c, &b) + 1e-12);
    }

    #[test]
    fn shift_preserves_distances(a in law(), b in law(), k in -5i64..5) {
        prop_assert!((tv_distance(&shift(&a, k), &shift(&b, k)) - tv_distance(&a, &b)).abs() < 1e-14);
        prop_assert!((wasserstein_distance(&shift(&a, k), &shift(&b, k)) - wasserstein_distance(&a, &b)).abs() < 1e-12);
        prop_assert!((shift(&a, k).mean() - a.mean() - k as f64).abs() < 1e-12);
    }

    #[test]
    fn wasserstein_dominates_tv_on_integers(a in law(), b in law()) {
        prop_assert!(tv_distance(&a, &b) <= wasserstein_distance(&a, &b) + 1e-12);
    }

    #[test]
    fn thinning_scales_factorial_moments(a in law(), p in 0.0f64..=1.0, s in 1u32..4) {
        let a = shift(&a, -a.min_support());
        let t = bernoulli_thin(&a, p).unwrap();
        let lhs = factorial_binomial_moment(&t, s);
        let rhs = p * factorial_binomial_moment(&a, s);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn mixture_mean_is_weighted(a in law(), b in law(), w in 0.0f64..=1.0) {
        let m = mixture(&[(w, a.clone()), (1.0 - w, b.clone())]).unwrap();
        prop_assert!((m.mean() - (w * a.mean() + (1.0 - w) * b.mean())).abs() < 1e-12);
        let total: f64 = m.masses().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn size_bias_of_binomial_is_shifted_binomial(n in 1u32..30, p in 0.01f64..0.99) {
        let lhs = size_bias(&binomial(n, p)).unwrap();
        prop_assert!(lhs.approx_eq(&shift(&binomial(n - 1, p), 1), 1e-13));
    }

    #[test]
    fn convolution_matches_direct_sum(a in law(), b in law()) {
        let c = a.convolve(&b);
        prop_assert!((c.mean() - a.mean() - b.mean()).abs() < 1e-12);
        prop_assert!((c.variance() - a.variance() - b.variance()).abs() < 1e-10);
    }
}

#[test]
fn binomial_against_truncated_poisson() {
    let po = bdstein::bdchain::stationary_distribution(&bdstein::bdchain::RateSchedule::poisson(1.0), 1e-15).unwrap();
    let tv = tv_distance(&binomial(2, 0.5), &po);
    // direct pmf summation
    let e = (-1f64).exp();
    let direct = 0.5 * ((0.25 - e).abs() + (0.5 - e).abs() + (0.25 - e / 2.0).abs() + (1.0 - 2.5 * e));
    assert!((tv - direct).abs() < 1e-14, "{tv} vs {direct}");
    assert!((tv - 0.198).abs() < 1e-3);
}

#[test]
fn thinning_example() {
    let t = bernoulli_thin(&FiniteDist::point(3), 0.25).unwrap();
    assert_eq!(t.pmf(0), 0.75);
    assert_eq!(t.pmf(3), 0.25);
}
