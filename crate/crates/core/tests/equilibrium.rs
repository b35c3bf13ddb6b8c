mod common;

use common::{shipped, two_route, two_route_oracle, SHIPPED};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transfernet::design::Design;
use transfernet::equilibrium::{
    kkt_check, solve_lower_level, total_travel_time, SolverOptions, StepRule,
};
use transfernet::netmodel::{apply_design, Scenario};
use transfernet::paradoxlab::grid;

fn designs(s: &Scenario) -> Vec<Design> {
    let mut out = vec![Design::closed(s), Design::all_open(s)];
    for (n, t) in s.transfers.iter().enumerate() {
        let mid = (t.c_min.max(1.0) + t.c_max) / 2.0;
        out.push(Design::closed(s).with(n, true, t.c_min.max(100.0)));
        out.push(Design::closed(s).with(n, true, mid));
    }
    out
}

#[test]
fn two_route_matches_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let theta = rng.gen_range(0.05..2.0);
        let demand = rng.gen_range(100.0..3000.0);
        let r1 = (rng.gen_range(5.0..30.0), rng.gen_range(300.0..1500.0));
        let r2 = (rng.gen_range(5.0..30.0), rng.gen_range(300.0..1500.0));
        let s = two_route(theta, demand, r1, r2);
        let net = apply_design(&s, &Design::closed(&s)).unwrap();
        let st = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
        assert!(st.converged);
        let (f1, f2) = two_route_oracle(theta, demand, r1, r2);
        assert!((st.path_flow(0) - f1).abs() < 1e-6, "{} vs {f1}", st.path_flow(0));
        assert!((st.path_flow(1) - f2).abs() < 1e-6);
    }
}

#[test]
fn equal_routes_split_evenly() {
    let s = two_route(0.5, 1000.0, (10.0, 500.0), (10.0, 500.0));
    let net = apply_design(&s, &Design::closed(&s)).unwrap();
    let st = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
    assert!((st.path_flow(0) - 500.0).abs() < 1e-7);
}

#[test]
fn msa_reaches_the_same_point() {
    let s = two_route(0.3, 1500.0, (12.0, 600.0), (9.0, 400.0));
    let net = apply_design(&s, &Design::closed(&s)).unwrap();
    let opts = SolverOptions {
        step_rule: StepRule::Msa,
        tolerance: 1e-6,
        ..SolverOptions::default()
    };
    let msa = solve_lower_level(&net, &s.behavior, &opts).unwrap();
    let (f1, _) = two_route_oracle(0.3, 1500.0, (12.0, 600.0), (9.0, 400.0));
    assert!((msa.path_flow(0) - f1).abs() < 1e-2 * 1500.0);
}

#[test]
fn shipped_scenarios_satisfy_kkt() {
    for name in SHIPPED {
        let s = shipped(name);
        for d in designs(&s) {
            let net = apply_design(&s, &d).unwrap();
            let st = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
            assert!(st.converged, "{name} {d:?}");
            let k = kkt_check(&net, &s.behavior, &st);
            assert!(k.route < 1e-6 && k.mode < 1e-6 && k.destination < 1e-6, "{name} {k:?}");
            assert!(k.conservation < 1e-9, "{name} {k:?}");
        }
    }
}

#[test]
fn merit_does_not_increase_within_a_round() {
    for name in SHIPPED {
        let s = shipped(name);
        for d in designs(&s) {
            let net = apply_design(&s, &d).unwrap();
            let st = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
            for w in st.history.windows(2) {
                if w[0].outer == w[1].outer {
                    let tol = 1e-12 * w[0].merit.abs().max(1.0);
                    assert!(w[1].merit <= w[0].merit + tol, "{name}: {:?}", w);
                }
            }
        }
    }
}

#[test]
fn binding_capacity_is_respected() {
    let s = shipped("fig2");
    for c in grid(100.0, 1700.0, 200.0).unwrap() {
        let net = apply_design(&s, &Design::from_capacities(&[c])).unwrap();
        let st = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
        assert!(st.converged);
        let load = st.transfer_flows[0];
        assert!(load <= c * (1.0 + 1e-6), "{load} > {c}");
        assert!(st.mu[0] > 0.0);
        assert!((load - c).abs() <= 1e-6 * c);
    }
}

#[test]
fn slack_capacity_has_zero_dual() {
    let s = shipped("fig2");
    let net = apply_design(&s, &Design::from_capacities(&[1900.0])).unwrap();
    let st = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
    assert!(st.transfer_flows[0] < 1900.0);
    assert_eq!(st.mu[0], 0.0);
}

#[test]
fn ttt_excludes_duals() {
    let s = shipped("fig2");
    let net = apply_design(&s, &Design::from_capacities(&[100.0])).unwrap();
    let st = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
    let by_hand: f64 = st
        .link_flows
        .iter()
        .zip(&st.link_times)
        .map(|(v, t)| v * t)
        .sum::<f64>()
        + st.transfer_flows[0] * 6.8;
    assert!((st.ttt - by_hand).abs() < 1e-6 * by_hand);
    assert_eq!(total_travel_time(&net, &st), st.ttt);
}

#[test]
fn no_room_to_grow_means_no_new_trips() {
    let mut s = shipped("fig2_elastic");
    for o in &mut s.demand.origins {
        o.max = o.existing;
    }
    let net = apply_design(&s, &Design::all_open(&s)).unwrap();
    let st = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
    assert!(st.converged);
    assert_eq!(st.generated(), 0.0);
}

#[test]
fn elastic_demand_stays_within_bounds() {
    let s = shipped("fig2_elastic");
    for d in designs(&s) {
        let net = apply_design(&s, &d).unwrap();
        let st = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
        let total = st.total_demand();
        assert!(total >= 100.0 - 1e-9 && total <= 2000.0 + 1e-6, "{total}");
    }
}

#[test]
fn generation_balances_inverse_demand() {
    // At an interior optimum the composite cost equals h(d).
    let s = shipped("fig2_elastic");
    let net = apply_design(&s, &Design::closed(&s)).unwrap();
    let st = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
    let k = kkt_check(&net, &s.behavior, &st);
    assert!(st.generated() > 0.0 && st.total_demand() < 2000.0);
    assert!(k.destination < 1e-6);
}

#[test]
fn solve_is_deterministic() {
    let s = shipped("fig5");
    let net = apply_design(&s, &Design::all_open(&s)).unwrap();
    let a = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
    let b = solve_lower_level(&net, &s.behavior, &s.solver).unwrap();
    assert_eq!(a.flows, b.flows);
    assert_eq!(a.history, b.history);
}
