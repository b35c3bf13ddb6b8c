use super::model::{Model, ObjectiveBreakdown, PathFlows};
use super::{SolverOptions, StepRule};
use crate::error::Result;
use crate::netmodel::{ActiveNetwork, BehaviorParams, Step};

/// One inner iteration of the solver, for convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeritRecord {
    pub outer: usize,
    /// Objective plus augmented-Lagrangian term of the current round.
    pub merit: f64,
    pub gap: f64,
}

/// Solved lower-level flows.
#[derive(Debug, Clone)]
pub struct EquilibriumState {
    pub flows: PathFlows,
    /// New demand per OD block.
    pub new_demand: Vec<f64>,
    pub link_flows: Vec<f64>,
    pub link_times: Vec<f64>,
    pub transfer_flows: Vec<f64>,
    /// Capacity duals per transfer candidate, in minutes.
    pub mu: Vec<f64>,
    pub objective: ObjectiveBreakdown,
    pub ttt: f64,
    pub gap: f64,
    pub iterations: usize,
    pub outer_iterations: usize,
    pub converged: bool,
    pub history: Vec<MeritRecord>,
}

impl EquilibriumState {
    pub fn path_flow(&self, p: usize) -> f64 {
        self.flows.total(p)
    }

    /// Passengers using `mode`, both demand classes.
    pub fn mode_flow(&self, net: &ActiveNetwork, mode: usize) -> f64 {
        net.paths
            .iter()
            .enumerate()
            .filter(|(_, p)| p.mode == mode)
            .map(|(i, _)| self.flows.total(i))
            .sum()
    }

    /// Trips of both classes.
    pub fn total_demand(&self) -> f64 {
        self.flows.existing.iter().chain(&self.flows.new).sum()
    }

    /// Trips of the new class.
    pub fn generated(&self) -> f64 {
        self.new_demand.iter().sum()
    }
}

/// Capacity feasibility and complementarity of transfer loads against
/// duals. Returns the worst relative violation and whether it is within
/// tolerance.
fn capacity_status(net: &ActiveNetwork, loads: &[f64], mu: &[f64], tol: f64) -> (f64, bool) {
    let mut worst: f64 = 0.0;
    for (n, cap) in net.capacity.iter().enumerate() {
        if let Some(c) = *cap {
            let rel = (loads[n] - c) / c;
            worst = worst.max(rel);
            if mu[n] > 0.0 {
                worst = worst.max(-rel);
            }
        }
    }
    (worst, worst <= tol)
}

/// Solve the lower level for a design by partial linearization inside an
/// augmented-Lagrangian loop on transfer capacities.
pub fn solve_lower_level(
    net: &ActiveNetwork,
    behavior: &BehaviorParams,
    opts: &SolverOptions,
) -> Result<EquilibriumState> {
    let model = Model::new(net, behavior);
    model.preflight()?;
    let n_t = net.n_transfers();
    let mut mu = vec![0.0; n_t];
    let mut rho = opts.penalty_init;

    let zero = PathFlows::zeros(model.n_paths());
    let loads0 = model.loads(&zero);
    let c0 = model.path_costs(&loads0, &model.duals(&loads0.transfers, &mu, rho));
    let (mut x, mut warm) = model.auxiliary(&c0, None);

    let mut history = Vec::new();
    let mut inner_total = 0usize;
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut prev_violation = f64::INFINITY;
    let mut outer_done = 0;
    let mut final_mu = mu.clone();

    for outer in 0..opts.max_outer {
        outer_done = outer + 1;
        let mut k = 0usize;
        let inner_ok = loop {
            let loads = model.loads(&x);
            let duals = model.duals(&loads.transfers, &mu, rho);
            let costs = model.path_costs(&loads, &duals);
            let (y, q) = model.auxiliary(&costs, Some(&warm));
            warm = q;
            gap = model.share_gap(&x, &y);
            let merit = model.objective(&x, &loads).total()
                + model.penalty(&loads.transfers, &mu, rho);
            history.push(MeritRecord { outer, merit, gap });
            if gap <= opts.tolerance {
                break true;
            }
            if inner_total >= opts.max_inner {
                break false;
            }
            let slope_at = |lam: f64| {
                let z = x.axpy(lam, &y);
                let lz = model.loads(&z);
                let cz = model.path_costs(&lz, &model.duals(&lz.transfers, &mu, rho));
                model.directional(&model.gradient(&z, &cz), &x, &y)
            };
            let mut slope0 = model.directional(&model.gradient(&x, &costs), &x, &y);
            if !(slope0 < 0.0) {
                // x on a face of the orthant: one-sided slope just inside.
                slope0 = slope_at(1e-9);
            }
            if !(slope0 < 0.0) {
                // No descent left at working precision.
                break gap <= opts.tolerance.sqrt();
            }
            let lambda = match opts.step_rule {
                StepRule::Msa => 1.0 / (k as f64 + 2.0),
                StepRule::Armijo => {
                    // For convex merit, slope(λ) <= c1 slope(0) implies the
                    // Armijo decrease at λ without subtracting nearly equal
                    // objective values.
                    let mut lam = 1.0;
                    loop {
                        if slope_at(lam) <= opts.armijo_c1 * slope0 {
                            break lam;
                        }
                        lam *= 0.5;
                        if lam < 1e-15 {
                            break 0.0;
                        }
                    }
                }
            };
            if lambda == 0.0 {
                break gap <= opts.tolerance.sqrt();
            }
            x = x.axpy(lambda, &y);
            k += 1;
            inner_total += 1;
        };

        let loads = model.loads(&x);
        let new_mu = model.duals(&loads.transfers, &mu, rho);
        let (violation, feasible) =
            capacity_status(net, &loads.transfers, &new_mu, opts.capacity_tolerance);
        final_mu = new_mu.clone();
        if inner_ok && feasible {
            converged = true;
            break;
        }
        if inner_total >= opts.max_inner {
            break;
        }
        mu = new_mu;
        if violation > 0.25 * prev_violation {
            rho = (rho * opts.penalty_growth).min(opts.penalty_max);
        }
        prev_violation = violation;
    }

    let new_demand = model.generated(&x);
    let loads = model.loads(&x);
    let objective = model.objective(&x, &loads);
    let s = net.scenario;
    let link_times: Vec<f64> = s
        .links
        .iter()
        .zip(&loads.links)
        .map(|(l, &v)| l.time(v))
        .collect();
    let ttt = travel_time(net, &loads.links, &loads.transfers);
    Ok(EquilibriumState {
        flows: x,
        new_demand,
        link_flows: loads.links,
        link_times,
        transfer_flows: loads.transfers,
        mu: final_mu,
        objective,
        ttt,
        gap,
        iterations: inner_total,
        outer_iterations: outer_done,
        converged,
        history,
    })
}

fn travel_time(net: &ActiveNetwork, links: &[f64], transfers: &[f64]) -> f64 {
    let s = net.scenario;
    let on_links: f64 = s.links.iter().zip(links).map(|(l, &v)| v * l.time(v)).sum();
    let on_transfers: f64 = s
        .transfers
        .iter()
        .zip(transfers)
        .map(|(t, &v)| v * t.time.time(v))
        .sum();
    on_links + on_transfers
}

/// Passenger travel time on links and transfers; capacity duals excluded.
pub fn total_travel_time(net: &ActiveNetwork, state: &EquilibriumState) -> f64 {
    travel_time(net, &state.link_flows, &state.transfer_flows)
}

/// Generalized cost of active path `p`: link and transfer times at the
/// given loads plus the capacity duals of crossed transfers.
pub fn path_cost(
    net: &ActiveNetwork,
    p: usize,
    link_flows: &[f64],
    transfer_flows: &[f64],
    mu: &[f64],
) -> f64 {
    let s = net.scenario;
    net.paths[p]
        .steps
        .iter()
        .map(|st| match *st {
            Step::Link(a) => s.links[a].time(link_flows[a]),
            Step::Transfer(n) => s.transfers[n].time.time(transfer_flows[n]) + mu[n],
        })
        .sum()
}

/// Logit target of the partial linearization at fixed path costs.
pub fn auxiliary_demand(
    net: &ActiveNetwork,
    behavior: &BehaviorParams,
    costs: &[f64],
) -> PathFlows {
    Model::new(net, behavior).auxiliary(costs, None).0
}

/// Lower-level objective of arbitrary path flows.
pub fn objective_value(
    net: &ActiveNetwork,
    behavior: &BehaviorParams,
    flows: &PathFlows,
) -> ObjectiveBreakdown {
    let model = Model::new(net, behavior);
    let loads = model.loads(flows);
    model.objective(flows, &loads)
}
