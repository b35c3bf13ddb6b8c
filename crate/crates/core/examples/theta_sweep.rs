//! TTT before and after opening P+R as route dispersion varies, and the
//! dispersion above which the paradox appears.

use transfernet::design::Design;
use transfernet::netmodel::load_scenario;
use transfernet::paradoxlab::{grid, sweep_theta};

fn main() -> transfernet::Result<()> {
    let s = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/fig2.json"))?;
    let series = sweep_theta(&s, &Design::all_open(&s), &grid(0.1, 0.9, 0.05)?, &s.solver)?;
    for p in &series.points {
        println!(
            "theta {:.2}  before {:10.1}  after {:10.1}  {}",
            p.value,
            p.ttt_before,
            p.ttt_after,
            if p.paradox() { "paradox" } else { "" }
        );
    }
    match series.crossover() {
        Some(t) => println!("paradox for theta above {t:.3}"),
        None => println!("no crossover in range"),
    }
    Ok(())
}
