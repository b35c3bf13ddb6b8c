//! Load a scenario, validate it and list its path set.
//!
//!     cargo run --example load_scenario -- crates/core/scenarios/fig5.json

use transfernet::design::Design;
use transfernet::netmodel::{apply_design, load_scenario};

fn main() -> transfernet::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/fig5.json").into());
    let s = load_scenario(&path)?;
    println!(
        "{} nodes, {} links, {} modes, {} transfer candidates, {} OD pairs",
        s.nodes.len(),
        s.links.len(),
        s.modes.len(),
        s.transfers.len(),
        s.demand.od.len()
    );
    for t in &s.transfers {
        println!(
            "  transfer {} at {}: capacity {}..{}, unit cost {}",
            t.id, s.nodes[t.node], t.c_min, t.c_max, t.unit_cost
        );
    }

    let net = apply_design(&s, &Design::all_open(&s))?;
    println!("{} active paths with every candidate open:", net.paths.len());
    for p in &net.paths {
        let o = &s.nodes[p.origin];
        let d = &s.nodes[p.destination];
        println!("  {:>3}  {o} -> {d}  mode {}", p.id, s.modes[p.mode].id);
    }
    Ok(())
}
