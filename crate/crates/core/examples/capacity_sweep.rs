//! After-state TTT against P+R parking capacity at theta = 0.9; prints the
//! capacity ranges where the paradox holds and the best capacity.

use transfernet::netmodel::load_scenario;
use transfernet::paradoxlab::{grid, sweep_capacity};

fn main() -> transfernet::Result<()> {
    let s = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/fig2.json"))?;
    let series = sweep_capacity(&s, 0, &grid(100.0, 2000.0, 10.0)?, 0.9, &s.solver)?;
    let before = series.points[0].ttt_before;
    println!("closed network TTT {before:.1}");
    for p in series.points.iter().step_by(10) {
        println!(
            "capacity {:6.0}  after {:10.1}  P+R load {:7.1}  dual {:6.3}",
            p.value, p.ttt_after, p.transfer_flows[0], p.mu[0]
        );
    }
    for (lo, hi) in series.paradox_regions() {
        println!("paradox between {lo:.1} and {hi:.1} spaces");
    }
    if let Some((c, ttt)) = series.minimizer() {
        println!("lowest TTT {ttt:.1} at {c:.0} spaces");
    }
    Ok(())
}
