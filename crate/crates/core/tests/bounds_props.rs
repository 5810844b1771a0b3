use bdstein::bounds::{
    bound_binomial_pbd, bound_bose_einstein, pbd_coupling_bound, tp_hypergeometric, tp_independent, tp_kruns,
    translated_poisson_bound, wasserstein_order_bound, BoundReport, PbdVariant, Smoothing, SmoothingProvider,
    TpInputs, TpKind, REGISTRY,
};
use bdstein::distcore::{make_dist, wasserstein_distance, FiniteDist};
use bdstein::models::{pbd_match_closed_form, BernoulliProfile, ModelSpec};
use bdstein::oracle::{exact_tv, quantile_coupling, Target};
use bdstein::Exec;
use proptest::prelude::*;

fn well_formed(r: &BoundReport) -> bool {
    let total: f64 = r.terms.values().sum();
    REGISTRY.contains(&r.name.as_str())
        && (total - r.value).abs() <= 1e-12 * r.value.abs().max(1.0)
        && r.value >= 0.0
        && r.certifying == r.hypotheses.iter().all(|h| h.status == bdstein::bounds::HypothesisStatus::Verified)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn independent_tp_dominates(probs in prop::collection::vec(0.05f64..0.9, 2..25)) {
        let prof = BernoulliProfile::new(&probs).unwrap();
        let rep = tp_independent(&prof).unwrap();
        prop_assert!(well_formed(&rep));
        let tv = exact_tv(&ModelSpec::BernoulliSum { probs }, &Target::Tp { lambda: None, sigma2: None }, Exec::Sequential).unwrap();
        prop_assert!(tv.value <= rep.value + 1e-10);
    }

    #[test]
    fn pbd_bounds_dominate(probs in prop::collection::vec(0.02f64..0.45, 3..25)) {
        let prof = BernoulliProfile::new(&probs).unwrap();
        let m = pbd_match_closed_form(&prof).unwrap();
        prop_assume!(m.gamma() > 0.0);
        let target = Target::Pbd { alpha: Some(m.alpha), gamma: Some(m.gamma()) };
        let tv = exact_tv(&ModelSpec::BernoulliSum { probs }, &target, Exec::Sequential).unwrap().value;
        for v in [PbdVariant::Smoothing, PbdVariant::NewBound, PbdVariant::BrownXia] {
            let rep = pbd_coupling_bound(&prof, v).unwrap();
            prop_assert!(well_formed(&rep));
            prop_assert!(tv <= rep.value + 1e-10, "{:?}: {} > {}", v, tv, rep.value);
        }
    }

    #[test]
    fn hypergeometric_tp_dominates(big_n in 3u64..14, m in 1u64..13, n in 1u64..13) {
        prop_assume!(m < big_n && n < big_n);
        let rep = tp_hypergeometric(big_n, m, n).unwrap();
        prop_assert!(well_formed(&rep));
        prop_assert!(!rep.any_failed());
        let tv = exact_tv(&ModelSpec::Hypergeometric { big_n, m, n }, &Target::Tp { lambda: None, sigma2: None }, Exec::Sequential).unwrap();
        prop_assert!(tv.value <= rep.value + 1e-10);
    }

    #[test]
    fn lq_pairs_agree(m in 0u32..6, lambda in 1.0f64..50.0, frac in 0.0f64..1.0, sigma2 in 0.5f64..40.0, dtv in 0.0f64..1.0) {
        for kind in [TpKind::Negrel, TpKind::Posrel] {
            let base = TpInputs { lambda, lambda2: frac * lambda, sigma2, l: m, q: 1.0, smoothing: Smoothing::Exact(dtv) };
            let a = translated_poisson_bound(kind, &base, vec![]).unwrap();
            let b = translated_poisson_bound(kind, &TpInputs { l: m + 1, q: 0.0, ..base }, vec![]).unwrap();
            prop_assert!((a.value - b.value).abs() <= 1e-12 * a.value.max(1.0));
        }
    }

    #[test]
    fn quantile_coupling_is_exact(xs in prop::collection::vec(0.01f64..1.0, 1..8), zs in prop::collection::vec(0.01f64..1.0, 1..8)) {
        // with Y = (Z - X)_+ the ordering bound equals d_W(X, Z)
        let x = make_dist(0, xs).unwrap();
        let z = make_dist(0, zs).unwrap();
        let pairs = quantile_coupling(&x, &z);
        let z_minus_y = make_dist(0, {
            let hi = z.max_support().max(x.max_support()) as usize;
            let mut m = vec![0.0; hi + 1];
            for &(a, b, w) in &pairs {
                m[a.min(b) as usize] += w;
            }
            m
        }).unwrap();
        let rep = wasserstein_order_bound(&x, &z, &z_minus_y, 1.0, 1.0, 1.0, 1).unwrap();
        prop_assert!(rep.certifying, "{:?}", rep.hypotheses);
        let expect = pairs.iter().map(|&(a, b, w)| (a - b).abs() as f64 * w).sum::<f64>();
        prop_assert!((rep.value - expect).abs() < 1e-12);
        prop_assert!((rep.value - wasserstein_distance(&x, &z)).abs() < 1e-12);
    }
}

#[test]
fn kruns_bounds_dominate_exact_tv() {
    for (n, k, p) in [(8u64, 2u32, 0.5), (12, 3, 0.6), (14, 2, 0.3)] {
        let rep = tp_kruns(n as f64, k, p, SmoothingProvider::Exact, Exec::Sequential).unwrap();
        assert!(well_formed(&rep));
        assert!(!rep.any_failed(), "{:?}", rep.hypotheses);
        let tv = exact_tv(&ModelSpec::Kruns { n, k, p }, &Target::Tp { lambda: None, sigma2: None }, Exec::Sequential).unwrap();
        assert!(tv.value <= rep.value + 1e-10);
    }
}

#[test]
fn bose_einstein_and_binomial_examples() {
    let be = bound_bose_einstein(5, 10).unwrap();
    assert!((be.value - 5.0 / 90.0).abs() < 1e-12);
    let tv = exact_tv(&ModelSpec::BoseEinstein { m: 5, d: 10 }, &Target::Geometric { q: None }, Exec::Sequential).unwrap();
    assert!(tv.value <= be.value);
    let bin = bound_binomial_pbd(20, 0.2).unwrap();
    assert!((bin.value - 0.08).abs() < 1e-15);
}

#[test]
fn uniform_mirror_construction() {
    let u = FiniteDist::uniform(0, 4).unwrap();
    let rep = wasserstein_order_bound(&u, &FiniteDist::point(4), &u.pushforward(|x| 4 - x), 1.0, 1.0, 1.0, 1).unwrap();
    assert!(rep.certifying);
    assert!((rep.value - 2.0).abs() < 1e-12);
}
