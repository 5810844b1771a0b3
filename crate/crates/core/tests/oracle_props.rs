use bdstein::distcore::make_dist;
use bdstein::models::ModelSpec;
use bdstein::oracle::{
    birthday_mc_tv, enumerate_all_joint, enumerate_joint, exact_tv, random_sconvex_validation, JointMode, OracleMethod,
    Target,
};
use bdstein::{Error, Exec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tv_symmetric_in_hypergeometric_parameters(big_n in 2u64..20, m in 1u64..20, n in 1u64..20) {
        prop_assume!(m < big_n && n < big_n);
        let t = Target::Poisson { lambda: None };
        let a = exact_tv(&ModelSpec::Hypergeometric { big_n, m, n }, &t, Exec::Sequential).unwrap();
        let b = exact_tv(&ModelSpec::Hypergeometric { big_n, m: n, n: m }, &t, Exec::Sequential).unwrap();
        prop_assert!((a.value - b.value).abs() < 1e-13);
    }

    #[test]
    fn kruns_tables_are_rotation_invariant(n in 4u64..11, p in 0.1f64..0.9) {
        let spec = ModelSpec::Kruns { n, k: 2, p };
        let all = enumerate_all_joint(&spec, JointMode::Neighbourhood, Exec::Sequential).unwrap();
        for e in &all[1..] {
            for (a, b) in e.table.given1.iter().zip(&all[0].table.given1) {
                prop_assert!((a - b).abs() < 1e-14);
            }
            prop_assert!((e.e_xy - all[0].e_xy).abs() < 1e-14);
        }
    }

    #[test]
    fn tables_reconstruct_w(big_n in 2u64..11, m in 1u64..10, n in 1u64..10, i in 0usize..10) {
        prop_assume!(m < big_n && n <= big_n && i < n as usize);
        let spec = ModelSpec::Hypergeometric { big_n, m, n };
        let e = enumerate_joint(&spec, i, JointMode::Complement, Exec::Sequential).unwrap();
        prop_assert!(e.table.sum_law().unwrap().approx_eq(&spec.exact_law(Exec::Sequential).unwrap(), 1e-13));
    }

    #[test]
    fn identical_laws_never_violate(m in prop::collection::vec(0.01f64..1.0, 1..8), s in 1u32..4, seed in any::<u64>()) {
        let a = make_dist(0, m).unwrap();
        let v = random_sconvex_validation(&a, &a, s, 50, seed, Exec::Sequential).unwrap();
        prop_assert_eq!(v.violations, 0);
    }
}

#[test]
fn budget_is_refused_not_degraded() {
    let spec = ModelSpec::Birthday { big_n: 11, m: 30, r: 0 };
    let err = exact_tv(&spec, &Target::Poisson { lambda: None }, Exec::Sequential).unwrap_err();
    assert!(matches!(err, Error::BudgetExceeded { .. }));
}

#[test]
fn exact_methods_have_no_stderr() {
    let r = exact_tv(&ModelSpec::BoseEinstein { m: 3, d: 4 }, &Target::Geometric { q: None }, Exec::Sequential).unwrap();
    assert_eq!(r.method, OracleMethod::PmfSummation);
    assert_eq!(r.method.stderr(), 0.0);
    let r = exact_tv(&ModelSpec::Birthday { big_n: 4, m: 3, r: 1 }, &Target::Poisson { lambda: None }, Exec::Sequential).unwrap();
    assert_eq!(r.method, OracleMethod::ExactEnumeration);
}

#[test]
fn monte_carlo_is_bit_identical_across_thread_counts() {
    let a = birthday_mc_tv(8, 20, 3, 17, 100_000, Exec::Sequential).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let b = pool.install(|| birthday_mc_tv(8, 20, 3, 17, 100_000, Exec::Parallel).unwrap());
    assert_eq!(a, b);
    assert!(a.method.stderr() > 0.0);
}
