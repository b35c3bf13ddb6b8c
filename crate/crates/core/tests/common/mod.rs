#![allow(dead_code)]

use std::path::PathBuf;

use transfernet::netmodel::{load_scenario, parse_scenario, Scenario};

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"))
}

pub fn shipped(name: &str) -> Scenario {
    load_scenario(scenario_path(name)).expect("shipped scenario loads")
}

pub const SHIPPED: [&str; 3] = ["fig2", "fig2_elastic", "fig5"];

/// `(t0, kappa)` of the link time `t0 + (v / kappa)^2`.
pub type Route = (f64, f64);

/// Two parallel car links between O and D with fixed demand.
pub fn two_route(theta: f64, demand: f64, r1: Route, r2: Route) -> Scenario {
    let link = |id: &str, (t0, kappa): Route| {
        format!(
            r#"{{"id": "{id}", "from": "O", "to": "D", "subnetwork": "car",
                "cost": {{"kind": "poly", "t0": {t0}, "alpha": 1, "kappa": {kappa}, "beta": 2}}}}"#
        )
    };
    let text = format!(
        r#"{{
  "nodes": ["O", "D"],
  "links": [{}, {}],
  "modes": [{{"id": "car", "kind": "single", "legs": ["car"]}}],
  "paths": [
    {{"id": "a", "origin": "O", "destination": "D", "mode": "car", "nodes": ["O", "D"], "links": ["1"]}},
    {{"id": "b", "origin": "O", "destination": "D", "mode": "car", "nodes": ["O", "D"], "links": ["2"]}}
  ],
  "demand": {{"od": [{{"origin": "O", "destination": "D", "existing": {demand}}}]}},
  "behavior": {{"theta": {theta}}}
}}"#,
        link("1", r1),
        link("2", r2)
    );
    parse_scenario(&text).expect("two-route scenario parses")
}

/// Route flows of the two-route network by bisection on the logit
/// fixed point `f1 = D / (1 + exp(theta (c1(f1) - c2(D - f1))))`.
pub fn two_route_oracle(theta: f64, demand: f64, r1: Route, r2: Route) -> (f64, f64) {
    let t = |(t0, kappa): Route, v: f64| t0 + (v / kappa).powi(2);
    let excess = |f1: f64| {
        let d = theta * (t(r1, f1) - t(r2, demand - f1));
        f1 - demand / (1.0 + d.exp())
    };
    let (mut lo, mut hi) = (0.0, demand);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let f1 = 0.5 * (lo + hi);
    (f1, demand - f1)
}
