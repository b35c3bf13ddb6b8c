//! Genetic search for the parking capacities that maximize generated trips
//! within the construction budget.

use transfernet::design::{ga_solve, GaParams};
use transfernet::netmodel::load_scenario;

fn main() -> transfernet::Result<()> {
    let s = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/fig5.json"))?;
    let params = GaParams {
        generations: 40,
        ..GaParams::default()
    };
    let res = ga_solve(&s, &params, &s.solver)?;
    for g in res.history.iter().step_by(5) {
        println!(
            "gen {:3}  best {:9.3}  mean {:9.3}  solves {}",
            g.generation, g.best, g.mean, g.evaluations
        );
    }
    for (t, d) in s.transfers.iter().zip(&res.best_design.decisions) {
        println!("{}: open {} capacity {}", t.id, d.open, d.capacity);
    }
    println!(
        "fitness {:.3}, cost {:.0} of {:.0}, {} lower-level solves",
        res.best_fitness, res.best_cost, s.budget, res.evaluations
    );
    Ok(())
}
