//! Before/after comparison on the four-node network: does opening the P+R
//! transfer raise total travel time?

use transfernet::design::Design;
use transfernet::netmodel::load_scenario;
use transfernet::paradoxlab::before_after;

fn main() -> transfernet::Result<()> {
    let s = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/fig2.json"))?;
    let rep = before_after(&s, &Design::all_open(&s), &s.behavior, &s.solver)?;
    println!("{:>6} {:>12} {:>12}", "path", "before", "after");
    for (i, id) in rep.paths.iter().enumerate() {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.1}"));
        println!("{id:>6} {:>12} {:>12}", show(rep.before.flows[i]), show(rep.after.flows[i]));
    }
    println!("{:>6} {:>12.1} {:>12.1}", "TTT", rep.before.ttt, rep.after.ttt);
    println!("paradox: {} (delta {:+.1})", rep.paradox, rep.delta_ttt);
    Ok(())
}
