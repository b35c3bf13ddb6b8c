use super::logit::logit_split;
use super::model::Model;
use super::solver::EquilibriumState;
use crate::netmodel::{ActiveNetwork, BehaviorParams, DemandPolicy};
use crate::numeric::log_sum_exp;

/// Worst violation of each optimality condition at a solved state.
///
/// Route, mode and destination entries compare observed shares with the
/// logit shares implied by the state's generalized costs; the destination
/// entry also holds the generation stationarity in minutes. The others are
/// relative.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KktReport {
    pub route: f64,
    pub mode: f64,
    pub destination: f64,
    pub conservation: f64,
    pub capacity: f64,
    pub complementarity: f64,
}

impl KktReport {
    pub fn max(&self) -> f64 {
        [
            self.route,
            self.mode,
            self.destination,
            self.conservation,
            self.capacity,
            self.complementarity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Check the stationarity, conservation, capacity and complementarity
/// conditions of `state`, using its capacity duals as transfer prices.
pub fn kkt_check(
    net: &ActiveNetwork,
    behavior: &BehaviorParams,
    state: &EquilibriumState,
) -> KktReport {
    let model = Model::new(net, behavior);
    let f = &state.flows;
    let loads = model.loads(f);
    let costs = model.path_costs(&loads, &state.mu);
    let mut rep = KktReport::default();
    let mut route = vec![0.0; model.n_paths()];

    let mut composite = Vec::with_capacity(net.blocks.len());
    for (bi, block) in net.blocks.iter().enumerate() {
        let (mode_share, c) = model.nest(bi, &costs, &mut route);
        composite.push(c);
        let mut classes: Vec<(&[f64], bool)> = vec![(&f.new, true)];
        classes.push((&f.existing, model.policy == DemandPolicy::FixedTotal));
        for (flows, free_mode) in classes {
            let (qm, q) = model.block_totals(bi, flows);
            for (k, mb) in block.modes.iter().enumerate() {
                if qm[k] > 0.0 {
                    for &p in &mb.paths {
                        rep.route = rep.route.max((flows[p] / qm[k] - route[p]).abs());
                    }
                }
                if free_mode && q > 0.0 {
                    rep.mode = rep.mode.max((qm[k] / q - mode_share[k]).abs());
                }
            }
        }

        // Existing demand is fixed by policy.
        let (qm_old, q_old) = model.block_totals(bi, &f.existing);
        match model.policy {
            DemandPolicy::FixedTotal => {
                let target = model.existing_total(bi);
                rep.conservation = rep
                    .conservation
                    .max((q_old - target).abs() / target.max(1.0));
            }
            DemandPolicy::FixedMode => {
                let split = model.existing_split(bi);
                for (k, mb) in block.modes.iter().enumerate() {
                    let target = split.map_or(0.0, |s| s[mb.mode]);
                    rep.conservation = rep
                        .conservation
                        .max((qm_old[k] - target).abs() / target.max(1.0));
                }
            }
        }
        let q_new = model.block_totals(bi, &f.new).1;
        rep.conservation = rep
            .conservation
            .max((state.new_demand[bi] - q_new).abs() / q_new.max(1.0));
    }

    // Destination choice and generation per origin.
    let mut dest_new = vec![0.0; model.dests.len()];
    let mut origin_new = vec![0.0; model.origin_room.len()];
    for (bi, block) in net.blocks.iter().enumerate() {
        dest_new[block.destination] += state.new_demand[bi];
        origin_new[block.origin] += state.new_demand[bi];
    }
    for (r, &room) in model.origin_room.iter().enumerate() {
        let o = origin_new[r];
        rep.conservation = rep.conservation.max((o - room).max(0.0) / room.max(1.0));
        let open: Vec<usize> = net
            .blocks
            .iter()
            .enumerate()
            .filter(|(bi, b)| {
                let dest = &model.dests[b.destination];
                b.origin == r
                    && composite[*bi].is_finite()
                    && dest_new[b.destination] < dest.room * (1.0 - 1e-9)
            })
            .map(|(bi, _)| bi)
            .collect();
        if open.is_empty() || room <= 0.0 {
            continue;
        }
        let net_cost = |bi: usize| {
            let s = net.blocks[bi].destination;
            composite[bi] - model.dests[s].h(dest_new[s])
        };
        let sub: f64 = open.iter().map(|&b| state.new_demand[b]).sum();
        if o > 0.0 && sub > 0.0 {
            let costs: Vec<f64> = open.iter().map(|&b| net_cost(b)).collect();
            let target = logit_split(&costs, model.eta);
            let mut w = 0.0;
            for (k, &b) in open.iter().enumerate() {
                let q = state.new_demand[b];
                rep.destination = rep.destination.max((q / sub - target[k]).abs());
                if q > 0.0 {
                    w += q * ((q / o).ln() / model.eta + costs[k]);
                }
            }
            w /= sub;
            let res = if o < room * (1.0 - 1e-9) { w.abs() } else { w.max(0.0) };
            rep.destination = rep.destination.max(res);
        } else {
            let w0 = -log_sum_exp(open.iter().map(|&b| -model.eta * net_cost(b))) / model.eta;
            rep.destination = rep.destination.max((-w0).max(0.0));
        }
    }
    for (s, dest) in model.dests.iter().enumerate() {
        if dest.room.is_finite() {
            rep.conservation = rep
                .conservation
                .max((dest_new[s] - dest.room).max(0.0) / dest.room.max(1.0));
        }
    }

    for (a, &v) in loads.links.iter().enumerate() {
        rep.conservation = rep
            .conservation
            .max((state.link_flows[a] - v).abs() / v.abs().max(1.0));
    }
    for (n, &v) in loads.transfers.iter().enumerate() {
        rep.conservation = rep
            .conservation
            .max((state.transfer_flows[n] - v).abs() / v.abs().max(1.0));
        match net.capacity[n] {
            Some(c) => {
                rep.capacity = rep.capacity.max((v - c).max(0.0) / c);
                if state.mu[n] > 1e-9 {
                    rep.complementarity = rep.complementarity.max((v - c).abs() / c);
                }
            }
            None => {
                rep.capacity = rep.capacity.max(v);
            }
        }
        if state.mu[n] < 0.0 {
            rep.complementarity = rep.complementarity.max(-state.mu[n]);
        }
    }
    rep
}
