mod common;

use common::{shipped, two_route, two_route_oracle};
use proptest::prelude::*;
use transfernet::design::{design_from_json, design_to_json, Design};
use transfernet::equilibrium::{kkt_check, logit_split, logsum, solve_lower_level};
use transfernet::netmodel::{apply_design, parse_scenario, BehaviorParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn logit_shares_form_a_distribution(
        costs in prop::collection::vec(-50.0..200.0f64, 1..8),
        scale in 0.01..5.0f64,
        shift in -100.0..100.0f64,
    ) {
        let s = logit_split(&costs, scale);
        prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(s.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let moved: Vec<f64> = costs.iter().map(|c| c + shift).collect();
        let t = logit_split(&moved, scale);
        for (a, b) in s.iter().zip(&t) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        for i in 0..costs.len() {
            for j in 0..costs.len() {
                if costs[i] < costs[j] {
                    prop_assert!(s[i] >= s[j]);
                }
            }
        }
    }

    #[test]
    fn logsum_is_bracketed(
        costs in prop::collection::vec(0.0..200.0f64, 1..8),
        scale in 0.01..5.0f64,
    ) {
        let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
        let l = logsum(&costs, scale);
        prop_assert!(l <= min + 1e-9);
        prop_assert!(l >= min - (costs.len() as f64).ln() / scale - 1e-9);
    }

    #[test]
    fn two_route_equilibrium_matches_oracle(
        theta in 0.05..2.0f64,
        demand in 50.0..4000.0f64,
        t1 in 5.0..40.0f64, k1 in 200.0..2000.0f64,
        t2 in 5.0..40.0f64, k2 in 200.0..2000.0f64,
    ) {
        let s = two_route(theta, demand, (t1, k1), (t2, k2));
        let net = apply_design(&s, &Design::closed(&s)).unwrap();
        let st = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
        prop_assert!(st.converged);
        let (f1, _) = two_route_oracle(theta, demand, (t1, k1), (t2, k2));
        prop_assert!((st.path_flow(0) - f1).abs() < 1e-6, "{} vs {}", st.path_flow(0), f1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn capacity_is_never_exceeded(cap in 20.0..2000.0f64, theta in 0.1..1.5f64) {
        let s = shipped("fig2").with_behavior(BehaviorParams::new(theta));
        let net = apply_design(&s, &Design::from_capacities(&[cap])).unwrap();
        let st = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
        prop_assert!(st.converged);
        prop_assert!(st.transfer_flows[0] <= cap * (1.0 + 1e-6));
        if st.mu[0] > 0.0 {
            prop_assert!((st.transfer_flows[0] - cap).abs() <= 1e-6 * cap);
        }
        let k = kkt_check(&net, &s.behavior, &st);
        prop_assert!(k.max() < 1e-6, "{:?}", k);
    }

    #[test]
    fn fixed_demand_is_conserved(theta in 0.02..1.0f64, bike in 300.0..1500.0f64, car in 400.0..800.0f64) {
        let s = shipped("fig5").with_behavior(BehaviorParams::new(theta));
        let net = apply_design(&s, &Design::from_capacities(&[bike, car])).unwrap();
        let st = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
        let existing: f64 = st.flows.existing.iter().sum();
        prop_assert!((existing - 800.0).abs() < 1e-9 * 800.0);
        prop_assert!(st.transfer_flows[0] <= bike * (1.0 + 1e-6));
        prop_assert!(st.transfer_flows[1] <= car * (1.0 + 1e-6));
    }

    #[test]
    fn scenario_json_round_trips(theta in 0.01..3.0f64, budget in 0.0..1e8f64, gamma in prop::option::of(0.01..3.0f64)) {
        let mut s = shipped("fig5");
        s.behavior = BehaviorParams { theta, gamma, eta: None };
        s.budget = budget;
        let back = parse_scenario(&s.to_json().unwrap()).unwrap();
        prop_assert_eq!(s, back);
    }

    #[test]
    fn design_json_round_trips(bike in prop::option::of(300.0..1500.0f64), car in prop::option::of(400.0..800.0f64)) {
        let s = shipped("fig5");
        let d = Design::from_capacities(&[bike.unwrap_or(0.0), car.unwrap_or(0.0)]);
        let text = design_to_json(&s, &d, None, None).unwrap();
        prop_assert_eq!(design_from_json(&s, &text).unwrap(), d);
    }
}
