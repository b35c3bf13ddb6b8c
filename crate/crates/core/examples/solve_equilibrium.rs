//! Solve the lower level of the four-node network with the P+R transfer
//! closed, open without limit, and open with 100 spaces, then verify each
//! state against the optimality conditions.

use transfernet::design::Design;
use transfernet::equilibrium::{kkt_check, solve_lower_level};
use transfernet::netmodel::{apply_design, load_scenario};

fn main() -> transfernet::Result<()> {
    let s = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/fig2.json"))?;
    let designs = [
        ("closed", Design::closed(&s)),
        ("open", Design::all_open(&s)),
        ("100 spaces", Design::from_capacities(&[100.0])),
    ];
    for (name, design) in designs {
        let net = apply_design(&s, &design)?;
        let st = solve_lower_level(&net, &s.behavior, &s.solver)?;
        println!("{name}: TTT {:.2}, {} iterations, converged {}", st.ttt, st.iterations, st.converged);
        for (p, path) in net.paths.iter().enumerate() {
            println!("  path {} flow {:9.3}", path.id, st.path_flow(p));
        }
        for (t, mu) in st.transfer_flows.iter().zip(&st.mu) {
            println!("  transfer load {t:.3}, dual {mu:.4} min");
        }
        let kkt = kkt_check(&net, &s.behavior, &st);
        println!("  worst KKT residual {:.2e}", kkt.max());
    }
    Ok(())
}
