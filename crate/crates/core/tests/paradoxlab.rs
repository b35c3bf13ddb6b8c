mod common;

use common::shipped;
use transfernet::design::Design;
use transfernet::netmodel::{BehaviorParams, LinkCostFn};
use transfernet::paradoxlab::{
    before_after, calibrate, grid, paradox_threshold_time, share_sweep, sweep_capacity, sweep_theta,
    transit_share_grid, write_fig6, write_sweep, write_table1, FreeParam, ParamRange, Targets,
};

#[test]
fn identical_states_show_no_paradox() {
    let s = shipped("fig2");
    let r = before_after(&s, &Design::closed(&s), &s.behavior, &s.solver).unwrap();
    assert_eq!(r.delta_ttt, 0.0);
    assert!(!r.paradox);
}

#[test]
fn prohibitive_transfer_changes_nothing() {
    let mut s = shipped("fig2");
    s.transfers[0].time = LinkCostFn::constant(1e6);
    let r = before_after(&s, &Design::all_open(&s), &s.behavior, &s.solver).unwrap();
    for i in 0..2 {
        let (b, a) = (r.before.flows[i].unwrap(), r.after.flows[i].unwrap());
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
    assert!(r.after.flows[2].unwrap() < 1e-9);
    assert!(r.delta_ttt.abs() < 1e-6 * r.before.ttt);
    assert!(!r.paradox || r.delta_ttt < 1e-6);
}

#[test]
fn zero_capacity_is_the_closed_network() {
    let s = shipped("fig2");
    let sw = sweep_capacity(&s, 0, &[0.0, 500.0], 0.9, &s.solver).unwrap();
    assert_eq!(sw.points[0].delta_ttt(), 0.0);
    assert_eq!(sw.points[0].transfer_flows[0], 0.0);
}

#[test]
fn report_flag_matches_delta() {
    let s = shipped("fig2");
    for theta in [0.3, 0.9] {
        let r = before_after(&s, &Design::all_open(&s), &BehaviorParams::new(theta), &s.solver).unwrap();
        assert_eq!(r.paradox, r.delta_ttt > 0.0);
        assert!((r.after.ttt - r.before.ttt - r.delta_ttt).abs() < 1e-9);
    }
}

#[test]
fn calibration_recovers_a_known_theta() {
    let s = shipped("fig2");
    let design = Design::all_open(&s);
    let truth = s.with_behavior(BehaviorParams::new(0.5));
    let r = before_after(&truth, &design, &truth.behavior, &s.solver).unwrap();
    let targets = Targets {
        flows: r.paths.iter().zip(&r.after.flows).map(|(p, f)| (p.clone(), f.unwrap())).collect(),
        ttt: None,
    };
    let free = [ParamRange { param: FreeParam::Theta, lo: 0.1, hi: 2.0 }];
    let fit = calibrate(&s, &design, &targets, &free, &s.solver).unwrap();
    assert!((fit.values[0] - 0.5).abs() < 1e-4, "{}", fit.values[0]);
    assert!(!fit.poor);
}

#[test]
fn flat_residual_keeps_the_scenario_values() {
    // Closed network: equal path times give 1000/1000 for every theta.
    let s = shipped("fig2");
    let targets = Targets {
        flows: vec![("1".into(), 755.0), ("2".into(), 1245.0)],
        ttt: None,
    };
    let free = [ParamRange { param: FreeParam::Theta, lo: 0.05, hi: 2.0 }];
    let fit = calibrate(&s, &Design::closed(&s), &targets, &free, &s.solver).unwrap();
    assert_eq!(fit.values[0], 0.9);
    assert!(fit.poor);
}

#[test]
fn threshold_time_equalizes_ttt() {
    let s = shipped("fig2");
    let tau = paradox_threshold_time(&s, 0, 2000.0, 0.0, 20.0, &s.solver).unwrap();
    let mut at = s.clone();
    at.transfers[0].time = LinkCostFn::constant(tau);
    let r = before_after(&at, &Design::all_open(&at), &at.behavior, &at.solver).unwrap();
    assert!(r.delta_ttt.abs() < 1e-4, "{}", r.delta_ttt);
    assert!(paradox_threshold_time(&s, 0, 2000.0, 0.0, 4.0, &s.solver).is_err());
}

#[test]
fn sweeps_reject_bad_grids() {
    let s = shipped("fig2");
    let d = Design::all_open(&s);
    assert!(sweep_theta(&s, &d, &[0.5, 0.4], &s.solver).is_err());
    assert!(sweep_theta(&s, &d, &[0.0, 0.4], &s.solver).is_err());
    assert!(sweep_capacity(&s, 3, &[100.0], 0.9, &s.solver).is_err());
    assert!(grid(1.0, 0.0, 0.1).is_err());
    assert_eq!(grid(0.1, 0.3, 0.1).unwrap(), [0.1, 0.2, 0.3]);
}

#[test]
fn share_sweep_reports_every_mode() {
    let s = shipped("fig2_elastic");
    let sw = share_sweep(&s, 0, &grid(100.0, 700.0, 300.0).unwrap(), &s.behavior, &s.solver).unwrap();
    assert_eq!(sw.modes, ["car", "metro", "pr"]);
    for p in &sw.points {
        assert!((p.shares.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(p.generated > 0.0);
    }
}

#[test]
fn share_grid_dimensions_and_bounds() {
    let s = shipped("fig5");
    let g = transit_share_grid(&s, 0, 1, &[300.0, 900.0], &[400.0, 450.0, 800.0], &s.solver).unwrap();
    assert_eq!(g.share.len(), 2);
    assert!(g.share.iter().all(|r| r.len() == 3));
    assert!(g.share.iter().flatten().all(|&x| (0.0..=1.0).contains(&x)));
    assert!(g.feasible[1][1] && !g.feasible[1][2]);
    assert!(transit_share_grid(&s, 0, 0, &[300.0], &[400.0], &s.solver).is_err());
}

#[test]
fn csv_layouts() {
    let dir = tempfile::tempdir().unwrap();
    let s = shipped("fig2");
    let r = before_after(&s, &Design::all_open(&s), &s.behavior, &s.solver).unwrap();
    write_table1(&dir.path().join("table1.csv"), &r).unwrap();
    let sw = sweep_theta(&s, &Design::all_open(&s), &[0.5, 0.9], &s.solver).unwrap();
    write_sweep(&dir.path().join("fig3a.csv"), &sw).unwrap();
    let f5 = shipped("fig5");
    let g = transit_share_grid(&f5, 0, 1, &[300.0], &[400.0], &f5.solver).unwrap();
    write_fig6(&dir.path().join("fig6.csv"), &g).unwrap();

    let first = |f: &str| {
        std::fs::read_to_string(dir.path().join(f))
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string()
    };
    assert_eq!(
        first("table1.csv"),
        "state,ttt,flow_1,flow_2,flow_3,cost_1,cost_2,cost_3,converged,paradox,delta_ttt"
    );
    assert!(first("fig3a.csv").starts_with("theta,ttt_before,ttt_after,delta_ttt,paradox,share_car"));
    assert_eq!(first("fig6.csv"), "bike_cap,car_cap,share,feasible,fitness");
    let rows = std::fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    assert!(rows.lines().nth(1).unwrap().starts_with("before,"));
    assert!(rows.lines().nth(2).unwrap().starts_with("after,"));
}
