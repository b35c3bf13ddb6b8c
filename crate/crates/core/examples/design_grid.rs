//! Transit share over the bike and car parking capacities of the
//! seven-node network, and the budget-feasible designs that maximize
//! generated trips.

use transfernet::netmodel::load_scenario;
use transfernet::paradoxlab::{grid, transit_share_grid};

fn main() -> transfernet::Result<()> {
    let s = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/fig5.json"))?;
    let (br, pr) = (s.transfer_index("BR").unwrap(), s.transfer_index("PR").unwrap());
    let bike = grid(300.0, 1500.0, 100.0)?;
    let car = grid(400.0, 800.0, 100.0)?;
    let g = transit_share_grid(&s, br, pr, &bike, &car, &s.solver)?;

    print!("bike\\car");
    for c in &car {
        print!(" {c:>7.0}");
    }
    println!();
    for (i, b) in bike.iter().enumerate() {
        print!("{b:>8.0}");
        for j in 0..car.len() {
            let mark = if g.feasible[i][j] { ' ' } else { '*' };
            print!(" {:>6.4}{mark}", g.share[i][j]);
        }
        println!();
    }
    println!("(* over budget)");
    if let Some(best) = g.best_fitness() {
        println!("best feasible fitness {best:.2} trips");
    }
    println!("optimum set: {:?}", g.optimum_set(1e-6));
    Ok(())
}
