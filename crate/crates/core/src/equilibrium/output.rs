use std::path::Path;

use super::solver::EquilibriumState;
use crate::error::Result;
use crate::netmodel::ActiveNetwork;
use crate::table::{flag, num, opt, writer};

/// Write `path_flows.csv`, `link_flows.csv`, `transfers.csv` and
/// `summary.csv` into `dir`.
pub fn write_bundle(net: &ActiveNetwork, state: &EquilibriumState, dir: &Path) -> Result<()> {
    let s = net.scenario;

    let mut w = writer(&dir.join("path_flows.csv"))?;
    w.write_record(["path", "mode", "origin", "destination", "f0", "f_new"])?;
    for (p, path) in net.paths.iter().enumerate() {
        w.write_record([
            path.id.clone(),
            s.modes[path.mode].id.clone(),
            s.nodes[path.origin].clone(),
            s.nodes[path.destination].clone(),
            num(state.flows.existing[p]),
            num(state.flows.new[p]),
        ])?;
    }
    w.flush()?;

    let mut w = writer(&dir.join("link_flows.csv"))?;
    w.write_record(["link", "subnetwork", "flow", "time"])?;
    for (a, link) in s.links.iter().enumerate() {
        w.write_record([
            link.id.clone(),
            link.subnetwork.clone(),
            num(state.link_flows[a]),
            num(state.link_times[a]),
        ])?;
    }
    w.flush()?;

    let mut w = writer(&dir.join("transfers.csv"))?;
    w.write_record(["candidate", "node", "open", "flow", "capacity", "mu"])?;
    for (n, t) in s.transfers.iter().enumerate() {
        w.write_record([
            t.id.clone(),
            s.nodes[t.node].clone(),
            flag(net.is_open(n)),
            num(state.transfer_flows[n]),
            opt(net.capacity[n]),
            num(state.mu[n]),
        ])?;
    }
    w.flush()?;

    let z = &state.objective;
    let mut w = writer(&dir.join("summary.csv"))?;
    w.write_record([
        "Z",
        "z1",
        "z2",
        "z3",
        "z4",
        "z5",
        "TTT",
        "generated",
        "gap",
        "iterations",
        "outer_iterations",
        "converged",
    ])?;
    w.write_record([
        num(z.total()),
        num(z.z1),
        num(z.z2),
        num(z.z3),
        num(z.z4),
        num(z.z5),
        num(state.ttt),
        num(state.generated()),
        num(state.gap),
        state.iterations.to_string(),
        state.outer_iterations.to_string(),
        flag(state.converged),
    ])?;
    w.flush()?;
    Ok(())
}
