use ehcoop_core::*;
use proptest::prelude::*;

fn energies(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..10.0f64, 1..=max_len)
}

fn trace_strategy(max_len: usize) -> impl Strategy<Value = EnergyTrace> {
    (1..=max_len)
        .prop_flat_map(|n| {
            let v = || prop::collection::vec(0.0..10.0f64, n);
            (v(), v(), v(), prop::sample::select(vec![0.0, 0.3, 0.7, 1.0]))
        })
        .prop_map(|(tx, rx, h, a)| EnergyTrace::new(tx, rx, h, a).unwrap())
}

fn models() -> Vec<CostModel> {
    vec![
        builtin_cost_model(CostKind::RateHalfLog2).unwrap(),
        builtin_cost_model(CostKind::ScaledInverseRate { beta: 0.5 }).unwrap(),
        builtin_cost_model(CostKind::ScaledInverseRate { beta: 3.0 }).unwrap(),
    ]
}

fn prefix(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn inverses_round_trip(x in 0.0..100.0f64) {
        for m in models() {
            prop_assert!((m.rate_inv(m.rate(x)) - x).abs() <= 1e-9 * (1.0 + x));
            prop_assert!((m.decode_cost(m.decode_inv(x)) - x).abs() <= 1e-9 * (1.0 + x));
            let r = m.rate(x);
            prop_assert!((m.rate(m.rate_inv(r)) - r).abs() <= 1e-10 * (1.0 + r));
            prop_assert!((m.decode_inv(m.decode_cost(r)) - r).abs() <= 1e-10 * (1.0 + r));
        }
    }

    #[test]
    fn rate_concave_decode_cost_convex(a in 0.0..50.0f64, w in 0.0..50.0f64) {
        let b = a + w;
        for m in models() {
            prop_assert!(m.rate((a + b) / 2.0) >= (m.rate(a) + m.rate(b)) / 2.0 - 1e-12);
            let (ra, rb) = (a / 10.0, b / 10.0);
            prop_assert!(m.decode_cost((ra + rb) / 2.0) <= (m.decode_cost(ra) + m.decode_cost(rb)) / 2.0 + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn staircase_conserves_and_respects_causality(b in energies(40)) {
        let s = staircase_levels(&b).unwrap();
        let total: f64 = b.iter().sum();
        prop_assert!((s.total() - total).abs() <= 1e-9 * (1.0 + total));
        for (l, c) in prefix(&s.per_slot).iter().zip(prefix(&b)) {
            prop_assert!(*l <= c + 1e-9 * (1.0 + c));
        }
    }

    #[test]
    fn staircase_levels_non_decreasing(b in energies(40)) {
        let s = staircase_levels(&b).unwrap();
        for w in s.per_slot.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-12 * (1.0 + w[1]));
        }
    }

    #[test]
    fn staircase_tight_where_level_rises(b in energies(40)) {
        let s = staircase_levels(&b).unwrap();
        let (lv, bd) = (prefix(&s.per_slot), prefix(&b));
        for i in 0..b.len() - 1 {
            if s.per_slot[i + 1] > s.per_slot[i] + 1e-9 {
                prop_assert!((lv[i] - bd[i]).abs() <= 1e-9 * (1.0 + bd[i]), "boundary {i}");
            }
        }
    }

    #[test]
    fn capped_fill_respects_caps_and_causality(
        (b, c) in (1..30usize).prop_flat_map(|n| (prop::collection::vec(0.0..10.0f64, n), prop::collection::vec(0.0..10.0f64, n)))
    ) {
        let s = capped_waterfill(&b, &c).unwrap();
        let total: f64 = b.iter().sum();
        prop_assert!(s.total() <= total + 1e-9);
        for (x, cap) in s.per_slot.iter().zip(&c) {
            prop_assert!(*x <= cap + 1e-9 && *x >= -1e-12);
        }
        for (l, cb) in prefix(&s.per_slot).iter().zip(prefix(&b)) {
            prop_assert!(*l <= cb + 1e-9 * (1.0 + cb));
        }
    }

    #[test]
    fn exclusion_loop_floor_and_termination(t in trace_strategy(30)) {
        let (levels, state) = min_constrained_waterfill(&t.rx_energy, &t.helper_energy, t.alpha).unwrap();
        prop_assert!(state.rounds.len() <= t.n_slots + 1);
        for (l, e) in levels.iter().zip(&t.rx_energy) {
            prop_assert!(*l >= e - 1e-9);
        }
        let extra: f64 = levels.iter().zip(&t.rx_energy).map(|(l, e)| l - e).sum();
        let budget = t.alpha * t.helper_energy.iter().sum::<f64>();
        prop_assert!(extra <= budget + 1e-9 * (1.0 + budget));
    }

    #[test]
    fn capped_exclusion_floor(t in trace_strategy(30)) {
        let caps: Vec<f64> = t.tx_energy.iter().map(|e| e + 1.0).collect();
        let (levels, state) = min_capped_waterfill(&t.rx_energy, &t.helper_energy, t.alpha, &caps).unwrap();
        prop_assert!(state.rounds.len() <= t.n_slots + 1);
        for i in 0..t.n_slots {
            prop_assert!(levels[i] >= t.rx_energy[i] - 1e-9);
            if !state.floor_above_cap.contains(&i) {
                prop_assert!(levels[i] <= caps[i].max(t.rx_energy[i]) + 1e-9);
            }
        }
    }

    #[test]
    fn solutions_feasible_and_helper_conserved(t in trace_strategy(12)) {
        let cost = CostModel::default();
        for kind in ScenarioKind::ALL {
            let sol = solve(kind, &t, &cost).unwrap();
            prop_assert!(sol.policy.is_well_formed());
            prop_assert_eq!(sol.policy.n_slots(), t.n_slots);
            prop_assert!((sol.objective - sol.policy.objective()).abs() <= 1e-9 * (1.0 + sol.objective));
            let report = check_feasible(&sol.policy, &ConstraintSystem::new(kind, t.clone(), cost)).unwrap();
            prop_assert!(report.is_feasible(), "{}: {:?}", kind, report);
            for (d, h) in prefix(&sol.policy.helper_transfer).iter().zip(prefix(&t.helper_energy)) {
                prop_assert!(*d <= h + 1e-9 * (1.0 + h));
            }
        }
    }

    #[test]
    fn transfer_schedule_of_full_power_levels(t in trace_strategy(20)) {
        prop_assume!(t.alpha > 0.0);
        let (levels, _) = min_constrained_waterfill(&t.rx_energy, &t.helper_energy, t.alpha).unwrap();
        let delta = transfer_schedule(&levels, &t.rx_energy, &t.helper_energy, t.alpha).unwrap();
        for i in 0..t.n_slots {
            let expected = (levels[i] - t.rx_energy[i]).max(0.0) / t.alpha;
            prop_assert!((delta[i] - expected).abs() <= 1e-12 * (1.0 + expected));
        }
    }
}
