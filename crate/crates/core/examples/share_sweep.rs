//! Elastic demand: modal shares, P+R path time and generated trips as the
//! P+R parking capacity grows.

use transfernet::netmodel::load_scenario;
use transfernet::paradoxlab::{grid, share_sweep};

fn main() -> transfernet::Result<()> {
    let s = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/fig2_elastic.json"))?;
    let series = share_sweep(&s, 0, &grid(100.0, 2000.0, 100.0)?, &s.behavior, &s.solver)?;
    let car = series.mode_share("car").unwrap();
    let metro = series.mode_share("metro").unwrap();
    let pr = series.mode_share("pr").unwrap();
    let cost = series.path_cost("3").unwrap();
    println!("capacity    car  metro    P+R  P+R time  generated");
    for (i, p) in series.points.iter().enumerate() {
        println!(
            "{:8.0} {:6.3} {:6.3} {:6.3} {:9.3} {:10.1}",
            p.value,
            car[i],
            metro[i],
            pr[i],
            cost[i].unwrap_or(f64::NAN),
            p.generated
        );
    }
    Ok(())
}
