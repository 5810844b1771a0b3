use bdstein::bdchain::{
    apply_stein_operator, empirical_sup_norm, equilibrium, indicator, stein_norm_constant, NormOrder, RateSchedule,
    SteinSolver,
};
use bdstein::Exec;
use proptest::prelude::*;

fn schedule() -> impl Strategy<Value = RateSchedule> {
    prop_oneof![
        (0.1f64..20.0).prop_map(RateSchedule::poisson),
        (0.05f64..0.95).prop_map(RateSchedule::geometric),
        (1u64..40, 0.02f64..0.98).prop_map(|(n, p)| RateSchedule::binomial(n, p)),
        (0.5f64..8.0, 0.05f64..0.8).prop_map(|(r, q)| RateSchedule::negative_binomial(r, q)),
        (1.0f64..300.0, 0.0f64..50.0).prop_map(|(a, g)| RateSchedule::pbd2(a, g + 0.1)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detailed_balance(r in schedule()) {
        let pi = equilibrium(&r).unwrap();
        let total: f64 = pi.masses().iter().sum::<f64>() + pi.tail_mass();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for j in 0..pi.masses().len() as i64 - 1 {
            let flow_up = r.birth(j) * pi.pmf(j);
            let flow_down = r.death(j + 1) * pi.pmf(j + 1);
            prop_assert!((flow_up - flow_down).abs() <= 1e-12 * flow_up.max(flow_down).max(1e-300));
        }
    }

    #[test]
    fn operator_has_mean_zero(r in schedule(), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let pi = equilibrium(&r).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..=pi.masses().len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ag = apply_stein_operator(&r, &g);
        let tail = pi.tail_mass() * (r.birth(pi.masses().len() as i64) + r.death(pi.masses().len() as i64) + 1.0);
        prop_assert!(pi.expect(|j| ag[j as usize]).abs() <= 1e-10 + tail);
    }

    #[test]
    fn solver_satisfies_the_equation(r in schedule(), bits in any::<u64>()) {
        let solver = SteinSolver::new(&r).unwrap();
        let set: Vec<i64> = (0..64).filter(|i| bits >> i & 1 == 1).collect();
        let sol = solver.solve(indicator(&set));
        prop_assert_eq!(sol.values[0], 0.0);
        prop_assert!(sol.residual <= 1e-10, "residual {}", sol.residual);
    }

    #[test]
    fn stein_factors_bound_random_sets(lambda in 0.2f64..15.0, seed in any::<u64>()) {
        let r = RateSchedule::poisson(lambda);
        let emp = empirical_sup_norm(&r, NormOrder::Delta(1), 40, seed, Exec::Sequential).unwrap();
        prop_assert_eq!(emp.within_analytic, Some(true));
        let sup = empirical_sup_norm(&r, NormOrder::SupF, 40, seed, Exec::Sequential).unwrap();
        prop_assert_eq!(sup.within_analytic, Some(true));
    }
}

#[test]
fn poisson_constant_at_one() {
    let c = stein_norm_constant(&RateSchedule::poisson(1.0), NormOrder::Delta(1)).unwrap();
    assert!((c - (1.0 - (-1f64).exp())).abs() < 1e-15);
}

#[test]
fn empirical_norm_is_thread_independent() {
    let r = RateSchedule::geometric(0.6);
    let a = empirical_sup_norm(&r, NormOrder::Delta(1), 300, 5, Exec::Sequential).unwrap();
    let b = empirical_sup_norm(&r, NormOrder::Delta(1), 300, 5, Exec::Parallel).unwrap();
    assert_eq!(a, b);
    assert!(a.value <= 1.0 / 0.4 * (1.0 + 1e-12));
}

#[test]
fn non_summable_schedule_is_rejected() {
    assert!(equilibrium(&RateSchedule::geometric(1.2)).is_err());
    assert!(equilibrium(&RateSchedule::pbd2(5.0, -1.0)).is_err());
}
