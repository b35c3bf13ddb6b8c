//! Objective pieces, path costs and the top-down logit loading shared by the
//! solver and the KKT check.

use super::generation::{GenBlock, GenDestination, Generation};
use super::logit::{logit_split_into, logsum};
use crate::error::{Error, Result};
use crate::netmodel::{ActiveNetwork, BehaviorParams, DemandPolicy, Step};
use crate::numeric::xlogx;

const LOG_FLOOR: f64 = 1e-300;

/// Path flows of the existing and the new demand class, indexed like
/// `ActiveNetwork::paths`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFlows {
    pub existing: Vec<f64>,
    pub new: Vec<f64>,
}

impl PathFlows {
    pub fn zeros(n: usize) -> Self {
        PathFlows {
            existing: vec![0.0; n],
            new: vec![0.0; n],
        }
    }

    pub fn total(&self, p: usize) -> f64 {
        self.existing[p] + self.new[p]
    }

    pub(crate) fn axpy(&self, lambda: f64, toward: &PathFlows) -> PathFlows {
        let mix = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x + lambda * (y - x)).max(0.0))
                .collect()
        };
        PathFlows {
            existing: mix(&self.existing, &toward.existing),
            new: mix(&self.new, &toward.new),
        }
    }
}

/// Components of the lower-level objective.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ObjectiveBreakdown {
    /// Route entropy plus link cost integrals.
    pub z1: f64,
    /// Transfer cost integrals.
    pub z2: f64,
    /// Mode-choice entropy, stated conditionally on OD totals.
    pub z3: f64,
    /// Destination-choice entropy.
    pub z4: f64,
    /// Negative integral of the inverse demand.
    pub z5: f64,
}

impl ObjectiveBreakdown {
    pub fn total(&self) -> f64 {
        self.z1 + self.z2 + self.z3 + self.z4 + self.z5
    }
}

pub(crate) struct Model<'n, 'a> {
    pub net: &'n ActiveNetwork<'a>,
    pub theta: f64,
    pub gamma: f64,
    pub eta: f64,
    pub policy: DemandPolicy,
    pub origin_room: Vec<f64>,
    pub dests: Vec<GenDestination>,
}

/// Link and transfer flows implied by path flows.
pub(crate) struct Loads {
    pub links: Vec<f64>,
    pub transfers: Vec<f64>,
}

impl<'n, 'a> Model<'n, 'a> {
    pub fn new(net: &'n ActiveNetwork<'a>, behavior: &BehaviorParams) -> Self {
        let demand = &net.scenario.demand;
        Model {
            net,
            theta: behavior.theta,
            gamma: behavior.gamma(),
            eta: behavior.eta(),
            policy: net.scenario.policy,
            origin_room: demand
                .origins
                .iter()
                .map(|o| (o.max - o.existing).max(0.0))
                .collect(),
            dests: demand
                .destinations
                .iter()
                .map(|d| GenDestination {
                    room: (d.max - d.existing).max(0.0),
                    a: d.a,
                    b: d.b,
                })
                .collect(),
        }
    }

    pub fn n_paths(&self) -> usize {
        self.net.paths.len()
    }

    /// Existing demand fixed per mode, or per OD pair.
    pub fn existing_total(&self, block: usize) -> f64 {
        self.net.scenario.demand.od[self.net.blocks[block].od].existing
    }

    pub fn existing_split(&self, block: usize) -> Option<&[f64]> {
        self.net.scenario.demand.od[self.net.blocks[block].od]
            .mode_split
            .as_deref()
    }

    /// Refuse demand that has nowhere to go and capacities that fixed
    /// flows alone overrun.
    pub fn preflight(&self) -> Result<()> {
        let s = self.net.scenario;
        let mut forced = vec![0.0; s.transfers.len()];
        for (b, block) in self.net.blocks.iter().enumerate() {
            let q = &s.demand.od[block.od];
            let missing = |what: &'static str| Error::NoActivePath {
                what,
                origin: s.nodes[q.origin].clone(),
                destination: s.nodes[q.destination].clone(),
            };
            match self.policy {
                DemandPolicy::FixedTotal => {
                    if q.existing > 0.0 {
                        if block.modes.is_empty() {
                            return Err(missing("existing"));
                        }
                        let all: Vec<usize> =
                            block.modes.iter().flat_map(|m| m.paths.clone()).collect();
                        for (n, f) in forced.iter_mut().enumerate() {
                            if all.iter().all(|&p| self.crosses(p, n)) {
                                *f += q.existing;
                            }
                        }
                    }
                }
                DemandPolicy::FixedMode => {
                    if let Some(split) = self.existing_split(b) {
                        for (m, &v) in split.iter().enumerate() {
                            if v <= 0.0 {
                                continue;
                            }
                            let mb = block
                                .mode_block(m)
                                .ok_or_else(|| missing("existing"))?;
                            for (n, f) in forced.iter_mut().enumerate() {
                                if mb.paths.iter().all(|&p| self.crosses(p, n)) {
                                    *f += v;
                                }
                            }
                        }
                    }
                }
            }
        }
        for (n, cap) in self.net.capacity.iter().enumerate() {
            if let Some(c) = cap {
                if forced[n] > c * (1.0 + 1e-9) {
                    return Err(Error::InfeasibleCapacity {
                        candidate: s.transfers[n].id.clone(),
                        forced: forced[n],
                        capacity: *c,
                    });
                }
            }
        }
        Ok(())
    }

    fn crosses(&self, p: usize, n: usize) -> bool {
        self.net.paths[p].transfers().any(|t| t == n)
    }

    pub fn loads(&self, f: &PathFlows) -> Loads {
        let mut links = vec![0.0; self.net.n_links()];
        let mut transfers = vec![0.0; self.net.n_transfers()];
        for (p, path) in self.net.paths.iter().enumerate() {
            let v = f.total(p);
            if v == 0.0 {
                continue;
            }
            for step in &path.steps {
                match *step {
                    Step::Link(a) => links[a] += v,
                    Step::Transfer(n) => transfers[n] += v,
                }
            }
        }
        Loads { links, transfers }
    }

    /// Penalty slope per candidate: `max(0, mu + rho (v - c))` when open.
    pub fn duals(&self, transfers: &[f64], mu: &[f64], rho: f64) -> Vec<f64> {
        self.net
            .capacity
            .iter()
            .enumerate()
            .map(|(n, cap)| match cap {
                Some(c) => (mu[n] + rho * (transfers[n] - c)).max(0.0),
                None => 0.0,
            })
            .collect()
    }

    pub fn penalty(&self, transfers: &[f64], mu: &[f64], rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        self.net
            .capacity
            .iter()
            .enumerate()
            .map(|(n, cap)| match cap {
                Some(c) => {
                    let s = (mu[n] + rho * (transfers[n] - c)).max(0.0);
                    (s * s - mu[n] * mu[n]) / (2.0 * rho)
                }
                None => 0.0,
            })
            .sum()
    }

    /// Generalized path costs: link times, transfer times and duals.
    pub fn path_costs(&self, loads: &Loads, duals: &[f64]) -> Vec<f64> {
        let s = self.net.scenario;
        let lt: Vec<f64> = s
            .links
            .iter()
            .zip(&loads.links)
            .map(|(l, &v)| l.time(v))
            .collect();
        let tt: Vec<f64> = s
            .transfers
            .iter()
            .zip(&loads.transfers)
            .zip(duals)
            .map(|((t, &v), &d)| t.time.time(v) + d)
            .collect();
        self.net
            .paths
            .iter()
            .map(|p| {
                p.steps
                    .iter()
                    .map(|st| match *st {
                        Step::Link(a) => lt[a],
                        Step::Transfer(n) => tt[n],
                    })
                    .sum()
            })
            .collect()
    }

    /// Nested logit quantities of one block at fixed path costs: route
    /// shares written into `route`, mode shares and the composite cost.
    pub fn nest(&self, block: usize, costs: &[f64], route: &mut [f64]) -> (Vec<f64>, f64) {
        let b = &self.net.blocks[block];
        let mut mode_cost = Vec::with_capacity(b.modes.len());
        let mut buf_c = Vec::new();
        let mut buf_s = Vec::new();
        for mb in &b.modes {
            buf_c.clear();
            buf_c.extend(mb.paths.iter().map(|&p| costs[p]));
            buf_s.resize(buf_c.len(), 0.0);
            logit_split_into(&buf_c, self.theta, &mut buf_s);
            for (k, &p) in mb.paths.iter().enumerate() {
                route[p] = buf_s[k];
            }
            mode_cost.push(logsum(&buf_c, self.theta));
        }
        let mut share = vec![0.0; mode_cost.len()];
        logit_split_into(&mode_cost, self.gamma, &mut share);
        let composite = logsum(&mode_cost, self.gamma);
        (share, composite)
    }

    /// Top-down logit loading at fixed costs with exact generation.
    pub fn auxiliary(&self, costs: &[f64], warm: Option<&[f64]>) -> (PathFlows, Vec<f64>) {
        let n = self.n_paths();
        let mut route = vec![0.0; n];
        let mut out = PathFlows::zeros(n);
        let mut shares = Vec::with_capacity(self.net.blocks.len());
        let mut gen = Vec::with_capacity(self.net.blocks.len());
        for (bi, block) in self.net.blocks.iter().enumerate() {
            let (share, composite) = self.nest(bi, costs, &mut route);
            match self.policy {
                DemandPolicy::FixedTotal => {
                    let q = self.existing_total(bi);
                    for (k, mb) in block.modes.iter().enumerate() {
                        for &p in &mb.paths {
                            out.existing[p] = q * share[k] * route[p];
                        }
                    }
                }
                DemandPolicy::FixedMode => {
                    if let Some(split) = self.existing_split(bi) {
                        for mb in &block.modes {
                            for &p in &mb.paths {
                                out.existing[p] = split[mb.mode] * route[p];
                            }
                        }
                    }
                }
            }
            gen.push(GenBlock {
                origin: block.origin,
                destination: block.destination,
                cost: composite,
            });
            shares.push(share);
        }
        let problem = Generation {
            blocks: &gen,
            origin_room: &self.origin_room,
            destinations: &self.dests,
            eta: self.eta,
        };
        let q = problem.solve(warm);
        for (bi, block) in self.net.blocks.iter().enumerate() {
            if q[bi] <= 0.0 {
                continue;
            }
            for (k, mb) in block.modes.iter().enumerate() {
                for &p in &mb.paths {
                    out.new[p] = q[bi] * shares[bi][k] * route[p];
                }
            }
        }
        (out, q)
    }

    /// Per-block totals of one class: (mode totals, block total).
    pub fn block_totals(&self, block: usize, f: &[f64]) -> (Vec<f64>, f64) {
        let modes: Vec<f64> = self.net.blocks[block]
            .modes
            .iter()
            .map(|mb| mb.paths.iter().map(|&p| f[p]).sum())
            .collect();
        let total = modes.iter().sum();
        (modes, total)
    }

    /// New demand per block.
    pub fn generated(&self, f: &PathFlows) -> Vec<f64> {
        (0..self.net.blocks.len())
            .map(|b| self.block_totals(b, &f.new).1)
            .collect()
    }

    /// Entropy and inverse-demand parts: (route, mode, destination, benefit).
    fn entropy_parts(&self, f: &PathFlows) -> (f64, f64, f64, f64) {
        let route: f64 = f
            .existing
            .iter()
            .chain(&f.new)
            .map(|&x| xlogx(x) - x)
            .sum::<f64>()
            / self.theta;
        let mut mode = 0.0;
        let mut origin_tot = vec![0.0; self.origin_room.len()];
        let mut dest_tot = vec![0.0; self.dests.len()];
        let mut dest_ent = 0.0;
        for bi in 0..self.net.blocks.len() {
            let mut classes: Vec<&[f64]> = vec![&f.new];
            if self.policy == DemandPolicy::FixedTotal {
                classes.push(&f.existing);
            }
            for flows in classes {
                let (qm, q) = self.block_totals(bi, flows);
                let within: f64 = qm.iter().map(|&x| xlogx(x)).sum();
                mode += (within - xlogx(q)) / self.gamma;
                mode -= qm.iter().map(|&x| xlogx(x) - x).sum::<f64>() / self.theta;
            }
            let q_new = self.block_totals(bi, &f.new).1;
            origin_tot[self.net.blocks[bi].origin] += q_new;
            dest_tot[self.net.blocks[bi].destination] += q_new;
            dest_ent += xlogx(q_new);
        }
        let dest = (dest_ent - origin_tot.iter().map(|&o| xlogx(o)).sum::<f64>()) / self.eta;
        let benefit: f64 = -self
            .dests
            .iter()
            .zip(&dest_tot)
            .map(|(d, &x)| d.a * x - 0.5 * d.b * x * x)
            .sum::<f64>();
        (route, mode, dest, benefit)
    }

    /// Objective terms at `f` with link and transfer loads `loads`.
    pub fn objective(&self, f: &PathFlows, loads: &Loads) -> ObjectiveBreakdown {
        let s = self.net.scenario;
        let (route, mode, dest, benefit) = self.entropy_parts(f);
        let links: f64 = s
            .links
            .iter()
            .zip(&loads.links)
            .map(|(l, &v)| l.integral(v))
            .sum();
        let transfers: f64 = s
            .transfers
            .iter()
            .zip(&loads.transfers)
            .map(|(t, &v)| t.time.integral(v))
            .sum();
        ObjectiveBreakdown {
            z1: route + links,
            z2: transfers,
            z3: mode,
            z4: dest,
            z5: benefit,
        }
    }

    /// Gradient of the objective plus penalty with respect to path flows,
    /// given generalized costs at the same point.
    pub fn gradient(&self, f: &PathFlows, costs: &[f64]) -> PathFlows {
        let n = self.n_paths();
        let mut g = PathFlows {
            existing: costs.to_vec(),
            new: costs.to_vec(),
        };
        let ln = |x: f64| x.max(LOG_FLOOR).ln();
        let mut origin_tot = vec![0.0; self.origin_room.len()];
        let mut dest_tot = vec![0.0; self.dests.len()];
        let mut totals = Vec::with_capacity(self.net.blocks.len());
        for bi in 0..self.net.blocks.len() {
            let (qm_new, q_new) = self.block_totals(bi, &f.new);
            let (qm_old, q_old) = self.block_totals(bi, &f.existing);
            origin_tot[self.net.blocks[bi].origin] += q_new;
            dest_tot[self.net.blocks[bi].destination] += q_new;
            totals.push((qm_new, q_new, qm_old, q_old));
        }
        for (bi, block) in self.net.blocks.iter().enumerate() {
            let (qm_new, q_new, qm_old, q_old) = &totals[bi];
            let dest = &self.dests[block.destination];
            let upper = ln(*q_new) - ln(origin_tot[block.origin]);
            let level = upper / self.eta - (dest.a - dest.b * dest_tot[block.destination]);
            for (k, mb) in block.modes.iter().enumerate() {
                let mode_new = (ln(qm_new[k]) - ln(*q_new)) / self.gamma;
                let mode_old = match self.policy {
                    DemandPolicy::FixedTotal => (ln(qm_old[k]) - ln(*q_old)) / self.gamma,
                    DemandPolicy::FixedMode => 0.0,
                };
                for &p in &mb.paths {
                    g.new[p] += (ln(f.new[p]) - ln(qm_new[k])) / self.theta + mode_new + level;
                    g.existing[p] +=
                        (ln(f.existing[p]) - ln(qm_old[k])) / self.theta + mode_old;
                }
            }
        }
        debug_assert_eq!(g.new.len(), n);
        g
    }

    /// Directional derivative `g . (y - x)`. Existing trips have fixed
    /// block (or mode) totals, so their gradient is measured against the
    /// block's first path; this keeps rounding drift in the totals out of
    /// the slope.
    pub fn directional(&self, g: &PathFlows, x: &PathFlows, y: &PathFlows) -> f64 {
        let term = |g: f64, x: f64, y: f64| if y != x { g * (y - x) } else { 0.0 };
        let mut s: f64 = (0..self.n_paths())
            .map(|p| term(g.new[p], x.new[p], y.new[p]))
            .sum();
        for block in &self.net.blocks {
            let groups: Vec<Vec<usize>> = match self.policy {
                DemandPolicy::FixedTotal => {
                    vec![block.modes.iter().flat_map(|mb| mb.paths.iter().copied()).collect()]
                }
                DemandPolicy::FixedMode => block.modes.iter().map(|mb| mb.paths.clone()).collect(),
            };
            for paths in groups {
                if let Some(&first) = paths.first() {
                    let r = g.existing[first];
                    s += paths
                        .iter()
                        .map(|&p| term(g.existing[p] - r, x.existing[p], y.existing[p]))
                        .sum::<f64>();
                }
            }
        }
        s
    }

    /// Largest share disagreement between two flow patterns: route shares
    /// within modes, mode shares within OD pairs and generated totals.
    pub fn share_gap(&self, x: &PathFlows, y: &PathFlows) -> f64 {
        let mut gap: f64 = 0.0;
        for bi in 0..self.net.blocks.len() {
            let block = &self.net.blocks[bi];
            for (cx, cy) in [(&x.existing, &y.existing), (&x.new, &y.new)] {
                let (mx, tx) = self.block_totals(bi, cx);
                let (my, ty) = self.block_totals(bi, cy);
                for (k, mb) in block.modes.iter().enumerate() {
                    if mx[k] > 0.0 && my[k] > 0.0 {
                        for &p in &mb.paths {
                            gap = gap.max((cx[p] / mx[k] - cy[p] / my[k]).abs());
                        }
                    }
                    if tx > 0.0 && ty > 0.0 {
                        gap = gap.max((mx[k] / tx - my[k] / ty).abs());
                    }
                }
                gap = gap.max((tx - ty).abs() / tx.max(ty).max(1.0));
            }
        }
        gap
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Design;
    use crate::netmodel::{apply_design, load_scenario, Scenario};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scenario(name: &str) -> Scenario {
        load_scenario(format!("{}/scenarios/{name}.json", env!("CARGO_MANIFEST_DIR"))).unwrap()
    }

    fn random_flows(n: usize, rng: &mut ChaCha8Rng) -> PathFlows {
        PathFlows {
            existing: (0..n).map(|_| rng.gen_range(50.0..400.0)).collect(),
            new: (0..n).map(|_| rng.gen_range(5.0..100.0)).collect(),
        }
    }

    fn merit(m: &Model, f: &PathFlows, mu: &[f64], rho: f64) -> f64 {
        let l = m.loads(f);
        m.objective(f, &l).total() + m.penalty(&l.transfers, mu, rho)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for name in ["fig2_elastic", "fig5"] {
            let s = scenario(name);
            let design = Design::closed(&s)
                .with(0, true, s.transfers[0].c_min.max(100.0))
                .with(s.transfers.len() - 1, true, s.transfers.last().unwrap().c_min.max(100.0));
            let net = apply_design(&s, &design).unwrap();
            let m = Model::new(&net, &s.behavior);
            let mu = vec![2.0; net.n_transfers()];
            let rho = 0.05;
            for _ in 0..5 {
                let f = random_flows(m.n_paths(), &mut rng);
                let l = m.loads(&f);
                let g = m.gradient(&f, &m.path_costs(&l, &m.duals(&l.transfers, &mu, rho)));
                for p in 0..m.n_paths() {
                    for class in 0..2 {
                        let h = 1e-4;
                        let bump = |d: f64| {
                            let mut x = f.clone();
                            if class == 0 {
                                x.existing[p] += d;
                            } else {
                                x.new[p] += d;
                            }
                            merit(&m, &x, &mu, rho)
                        };
                        let fd = (bump(h) - bump(-h)) / (2.0 * h);
                        let an = if class == 0 { g.existing[p] } else { g.new[p] };
                        assert!((fd - an).abs() < 1e-5 * an.abs().max(1.0), "{name} {p} {class}: {fd} vs {an}");
                    }
                }
            }
        }
    }

    #[test]
    fn objective_is_convex_along_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = scenario("fig5");
        let net = apply_design(&s, &Design::all_open(&s)).unwrap();
        let m = Model::new(&net, &s.behavior);
        for _ in 0..20 {
            let a = random_flows(m.n_paths(), &mut rng);
            let b = random_flows(m.n_paths(), &mut rng);
            let at = |t: f64| merit(&m, &a.axpy(t, &b), &[0.0, 0.0], 0.0);
            let (fa, fm, fb) = (at(0.0), at(0.5), at(1.0));
            assert!(fm <= 0.5 * (fa + fb) + 1e-9 * fa.abs().max(1.0));
        }
    }

    #[test]
    fn logit_target_is_a_descent_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = scenario("fig5");
        let net = apply_design(&s, &Design::all_open(&s)).unwrap();
        let m = Model::new(&net, &s.behavior);
        for _ in 0..20 {
            let x = random_flows(m.n_paths(), &mut rng);
            let l = m.loads(&x);
            let c = m.path_costs(&l, &[0.0, 0.0]);
            let (y, _) = m.auxiliary(&c, None);
            assert!(m.directional(&m.gradient(&x, &c), &x, &y) <= 0.0);
        }
    }

    #[test]
    fn target_of_itself_has_no_gap() {
        let s = scenario("fig2");
        let net = apply_design(&s, &Design::all_open(&s)).unwrap();
        let m = Model::new(&net, &s.behavior);
        let c = vec![10.0, 12.0, 11.0];
        let (y, _) = m.auxiliary(&c, None);
        assert_eq!(m.share_gap(&y, &y), 0.0);
        let total: f64 = y.existing.iter().sum();
        assert!((total - 2000.0).abs() < 1e-9);
    }
}
