//! Paradox experiments: before/after comparisons, dispersion and capacity
//! sweeps, the variable-demand share sweep, the two-candidate design grid
//! and calibration of unpublished parameters.

mod calibrate;
mod output;

use rayon::prelude::*;

pub use calibrate::{calibrate, paradox_threshold_time, Calibration, FreeParam, ParamRange, Targets};
pub use output::{write_fig6, write_sweep, write_table1};

use crate::design::{check_feasible, Design};
use crate::equilibrium::{path_cost, solve_lower_level, EquilibriumState, SolverOptions};
use crate::error::{Error, Result};
use crate::netmodel::{apply_design, ActiveNetwork, BehaviorParams, Scenario};

/// Flows, travel costs and TTT of one solved state, aligned with the
/// report's path list. Paths absent from the state are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSummary {
    pub ttt: f64,
    pub flows: Vec<Option<f64>>,
    pub costs: Vec<Option<f64>>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParadoxReport {
    pub paths: Vec<String>,
    pub before: StateSummary,
    pub after: StateSummary,
    /// `after.ttt - before.ttt`.
    pub delta_ttt: f64,
    pub paradox: bool,
}

/// Path id, flow and travel time (capacity duals excluded) of every
/// active path.
fn path_rows(net: &ActiveNetwork, st: &EquilibriumState) -> Vec<(String, f64, f64)> {
    let zero = vec![0.0; net.n_transfers()];
    (0..net.paths.len())
        .map(|p| {
            (
                net.paths[p].id.clone(),
                st.path_flow(p),
                path_cost(net, p, &st.link_flows, &st.transfer_flows, &zero),
            )
        })
        .collect()
}

fn merge_ids(ids: &mut Vec<String>, rows: &[(String, f64, f64)]) {
    for (id, _, _) in rows {
        if !ids.contains(id) {
            ids.push(id.clone());
        }
    }
}

fn align(ids: &[String], rows: &[(String, f64, f64)]) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    ids.iter()
        .map(|id| match rows.iter().find(|r| &r.0 == id) {
            Some(r) => (Some(r.1), Some(r.2)),
            None => (None, None),
        })
        .unzip()
}

fn solve(
    scenario: &Scenario,
    design: &Design,
    opts: &SolverOptions,
) -> Result<(Vec<(String, f64, f64)>, EquilibriumState)> {
    let net = apply_design(scenario, design)?;
    let st = solve_lower_level(&net, &scenario.behavior, opts)?;
    Ok((path_rows(&net, &st), st))
}

/// Solve the all-closed network and `design` under `params` and compare.
pub fn before_after(
    scenario: &Scenario,
    design: &Design,
    params: &BehaviorParams,
    opts: &SolverOptions,
) -> Result<ParadoxReport> {
    let s = scenario.with_behavior(*params);
    let (rows_b, st_b) = solve(&s, &Design::closed(&s), opts)?;
    let (rows_a, st_a) = solve(&s, design, opts)?;
    let mut paths = Vec::new();
    merge_ids(&mut paths, &rows_b);
    merge_ids(&mut paths, &rows_a);
    let summary = |rows: &[(String, f64, f64)], st: &EquilibriumState| {
        let (flows, costs) = align(&paths, rows);
        StateSummary {
            ttt: st.ttt,
            flows,
            costs,
            converged: st.converged,
        }
    };
    let before = summary(&rows_b, &st_b);
    let after = summary(&rows_a, &st_a);
    let delta_ttt = after.ttt - before.ttt;
    Ok(ParadoxReport {
        paths,
        before,
        after,
        delta_ttt,
        paradox: delta_ttt > 0.0,
    })
}

/// Metrics at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub ttt_before: f64,
    pub ttt_after: f64,
    /// Passenger share per scenario mode, after state.
    pub shares: Vec<f64>,
    /// Travel time per series path, after state.
    pub path_costs: Vec<Option<f64>>,
    /// New trips generated in the after state.
    pub generated: f64,
    pub transfer_flows: Vec<f64>,
    pub mu: Vec<f64>,
    pub converged: bool,
}

impl SweepPoint {
    pub fn delta_ttt(&self) -> f64 {
        self.ttt_after - self.ttt_before
    }

    pub fn paradox(&self) -> bool {
        self.delta_ttt() > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSeries {
    pub parameter: String,
    pub modes: Vec<String>,
    pub transfers: Vec<String>,
    pub paths: Vec<String>,
    pub points: Vec<SweepPoint>,
}

/// Zero of the line through `(x0, y0)` and `(x1, y1)`.
fn root(x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    x0 + (x1 - x0) * y0 / (y0 - y1)
}

impl SweepSeries {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn mode_share(&self, mode: &str) -> Option<Vec<f64>> {
        let m = self.modes.iter().position(|x| x == mode)?;
        Some(self.points.iter().map(|p| p.shares[m]).collect())
    }

    pub fn path_cost(&self, path: &str) -> Option<Vec<Option<f64>>> {
        let i = self.paths.iter().position(|x| x == path)?;
        Some(self.points.iter().map(|p| p.path_costs[i]).collect())
    }

    /// First value where the after state overtakes the before state,
    /// interpolated linearly between grid points.
    pub fn crossover(&self) -> Option<f64> {
        self.points.windows(2).find_map(|w| {
            let (d0, d1) = (w[0].delta_ttt(), w[1].delta_ttt());
            (d0 <= 0.0 && d1 > 0.0).then(|| root(w[0].value, d0, w[1].value, d1))
        })
    }

    /// Maximal intervals with a paradox. Inner boundaries are interpolated;
    /// runs touching the grid edge end at the edge value.
    pub fn paradox_regions(&self) -> Vec<(f64, f64)> {
        let pts = &self.points;
        let mut out = Vec::new();
        let mut i = 0;
        while i < pts.len() {
            if !pts[i].paradox() {
                i += 1;
                continue;
            }
            let start = i;
            while i + 1 < pts.len() && pts[i + 1].paradox() {
                i += 1;
            }
            let lo = if start == 0 {
                pts[0].value
            } else {
                let (a, b) = (&pts[start - 1], &pts[start]);
                root(a.value, a.delta_ttt(), b.value, b.delta_ttt())
            };
            let hi = if i + 1 == pts.len() {
                pts[i].value
            } else {
                let (a, b) = (&pts[i], &pts[i + 1]);
                root(a.value, a.delta_ttt(), b.value, b.delta_ttt())
            };
            out.push((lo, hi));
            i += 1;
        }
        out
    }

    /// Grid value with the smallest after-state TTT.
    pub fn minimizer(&self) -> Option<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.value, p.ttt_after))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

fn check_grid(name: &str, values: &[f64], min: f64, strict_min: bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Argument(format!("{name}: empty grid")));
    }
    for v in values {
        let ok = v.is_finite() && if strict_min { *v > min } else { *v >= min };
        if !ok {
            return Err(Error::Argument(format!("{name}: bad grid value {v}")));
        }
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument(format!("{name}: values must be strictly increasing")));
    }
    Ok(())
}

/// One sweep value: its scenario, the after design and the before TTT
/// when already known.
type Job = (f64, Scenario, Design, Option<f64>);

/// Solve every job in parallel and assemble a series.
fn run_series(parameter: &str, base: &Scenario, jobs: Vec<Job>, opts: &SolverOptions) -> Result<SweepSeries> {
    let solved: Vec<(f64, f64, Vec<(String, f64, f64)>, EquilibriumState, Vec<f64>)> = jobs
        .par_iter()
        .map(|(value, s, design, before)| {
            let ttt_before = match before {
                Some(t) => *t,
                None => closed_ttt(s, opts)?,
            };
            let net = apply_design(s, design)?;
            let st = solve_lower_level(&net, &s.behavior, opts)?;
            let total = st.total_demand();
            let shares = (0..s.modes.len())
                .map(|m| if total > 0.0 { st.mode_flow(&net, m) / total } else { 0.0 })
                .collect();
            Ok((*value, ttt_before, path_rows(&net, &st), st, shares))
        })
        .collect::<Result<_>>()?;
    let mut paths = Vec::new();
    for (_, _, rows, _, _) in &solved {
        merge_ids(&mut paths, rows);
    }
    let points = solved
        .into_iter()
        .map(|(value, ttt_before, rows, st, shares)| SweepPoint {
            value,
            ttt_before,
            ttt_after: st.ttt,
            shares,
            path_costs: align(&paths, &rows).1,
            generated: st.generated(),
            transfer_flows: st.transfer_flows.clone(),
            mu: st.mu.clone(),
            converged: st.converged,
        })
        .collect();
    Ok(SweepSeries {
        parameter: parameter.to_string(),
        modes: base.modes.iter().map(|m| m.id.clone()).collect(),
        transfers: base.transfers.iter().map(|t| t.id.clone()).collect(),
        paths,
        points,
    })
}

fn closed_ttt(s: &Scenario, opts: &SolverOptions) -> Result<f64> {
    let net = apply_design(s, &Design::closed(s))?;
    Ok(solve_lower_level(&net, &s.behavior, opts)?.ttt)
}

/// Before and after TTT of `design` for each route dispersion `θ`. Mode
/// and destination scales follow `θ` unless the scenario fixes them.
pub fn sweep_theta(
    scenario: &Scenario,
    design: &Design,
    thetas: &[f64],
    opts: &SolverOptions,
) -> Result<SweepSeries> {
    check_grid("theta", thetas, 0.0, true)?;
    let jobs = thetas
        .iter()
        .map(|&theta| {
            let s = scenario.with_behavior(BehaviorParams {
                theta,
                ..scenario.behavior
            });
            (theta, s, design.clone(), None)
        })
        .collect();
    run_series("theta", scenario, jobs, opts)
}

fn capacity_jobs(
    scenario: &Scenario,
    candidate: usize,
    capacities: &[f64],
    params: &BehaviorParams,
    opts: &SolverOptions,
) -> Result<Vec<Job>> {
    if candidate >= scenario.transfers.len() {
        return Err(Error::Argument(format!("no transfer candidate #{candidate}")));
    }
    check_grid("capacity", capacities, 0.0, false)?;
    let s = scenario.with_behavior(*params);
    let before = closed_ttt(&s, opts)?;
    Ok(capacities
        .iter()
        .map(|&c| {
            let d = Design::closed(&s).with(candidate, c > 0.0, c);
            (c, s.clone(), d, Some(before))
        })
        .collect())
}

/// After-state TTT for each capacity of one candidate, other candidates
/// closed. Capacity 0 closes the candidate.
pub fn sweep_capacity(
    scenario: &Scenario,
    candidate: usize,
    capacities: &[f64],
    theta: f64,
    opts: &SolverOptions,
) -> Result<SweepSeries> {
    let params = BehaviorParams {
        theta,
        ..scenario.behavior
    };
    let jobs = capacity_jobs(scenario, candidate, capacities, &params, opts)?;
    run_series("capacity", scenario, jobs, opts)
}

/// Modal shares, path costs and generated demand against the capacity of
/// one candidate, for scenarios with elastic demand.
pub fn share_sweep(
    scenario: &Scenario,
    candidate: usize,
    capacities: &[f64],
    params: &BehaviorParams,
    opts: &SolverOptions,
) -> Result<SweepSeries> {
    let jobs = capacity_jobs(scenario, candidate, capacities, params, opts)?;
    run_series("capacity", scenario, jobs, opts)
}

/// Transit share, budget feasibility and fitness over a two-candidate
/// capacity grid. Rows follow `bike_caps`, columns `car_caps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareGrid {
    pub bike_caps: Vec<f64>,
    pub car_caps: Vec<f64>,
    pub share: Vec<Vec<f64>>,
    pub feasible: Vec<Vec<bool>>,
    pub fitness: Vec<Vec<f64>>,
    pub converged: Vec<Vec<bool>>,
}

impl ShareGrid {
    /// Feasible cells whose fitness is within `rel_tol` of the best
    /// feasible fitness.
    pub fn optimum_set(&self, rel_tol: f64) -> Vec<(f64, f64)> {
        let mut best = f64::NEG_INFINITY;
        for (i, row) in self.fitness.iter().enumerate() {
            for (j, &f) in row.iter().enumerate() {
                if self.feasible[i][j] && self.converged[i][j] {
                    best = best.max(f);
                }
            }
        }
        let mut out = Vec::new();
        for (i, row) in self.fitness.iter().enumerate() {
            for (j, &f) in row.iter().enumerate() {
                if self.feasible[i][j] && self.converged[i][j] && f >= best - rel_tol * best.abs() {
                    out.push((self.bike_caps[i], self.car_caps[j]));
                }
            }
        }
        out
    }

    pub fn best_fitness(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, row) in self.fitness.iter().enumerate() {
            for (j, &f) in row.iter().enumerate() {
                if self.feasible[i][j] && self.converged[i][j] {
                    best = Some(best.map_or(f, |b| b.max(f)));
                }
            }
        }
        best
    }
}

/// Full factorial solve over the capacities of two candidates; all other
/// candidates stay closed.
pub fn transit_share_grid(
    scenario: &Scenario,
    bike: usize,
    car: usize,
    bike_caps: &[f64],
    car_caps: &[f64],
    opts: &SolverOptions,
) -> Result<ShareGrid> {
    let n = scenario.transfers.len();
    if bike >= n || car >= n || bike == car {
        return Err(Error::Argument(format!(
            "grid needs two distinct transfer candidates, got #{bike} and #{car}"
        )));
    }
    check_grid("bike capacity", bike_caps, 0.0, false)?;
    check_grid("car capacity", car_caps, 0.0, false)?;
    let cells: Vec<(usize, usize)> = (0..bike_caps.len())
        .flat_map(|i| (0..car_caps.len()).map(move |j| (i, j)))
        .collect();
    let solved: Vec<(f64, bool, f64, bool)> = cells
        .par_iter()
        .map(|&(i, j)| {
            let (cb, cc) = (bike_caps[i], car_caps[j]);
            let design = Design::closed(scenario)
                .with(bike, cb > 0.0, cb)
                .with(car, cc > 0.0, cc);
            let feasible = check_feasible(scenario, &design).feasible();
            let net = apply_design(scenario, &design)?;
            let st = solve_lower_level(&net, &scenario.behavior, opts)?;
            let total = st.total_demand();
            let transit: f64 = (0..scenario.modes.len())
                .filter(|&m| scenario.modes[m].transit)
                .map(|m| st.mode_flow(&net, m))
                .sum();
            let share = if total > 0.0 { transit / total } else { 0.0 };
            Ok((share, feasible, st.generated(), st.converged))
        })
        .collect::<Result<_>>()?;
    let mut grid = ShareGrid {
        bike_caps: bike_caps.to_vec(),
        car_caps: car_caps.to_vec(),
        share: vec![Vec::new(); bike_caps.len()],
        feasible: vec![Vec::new(); bike_caps.len()],
        fitness: vec![Vec::new(); bike_caps.len()],
        converged: vec![Vec::new(); bike_caps.len()],
    };
    for (&(i, _), (share, feasible, fitness, converged)) in cells.iter().zip(solved) {
        grid.share[i].push(share);
        grid.feasible[i].push(feasible);
        grid.fitness[i].push(fitness);
        grid.converged[i].push(converged);
    }
    Ok(grid)
}

/// Evenly spaced grid from `from` to `to` inclusive.
pub fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && step.is_finite() && step > 0.0 && to >= from) {
        return Err(Error::Argument(format!(
            "bad grid: from {from} to {to} step {step}"
        )));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|k| {
            let v = from + k as f64 * step;
            (v * 1e9).round() / 1e9
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(value: f64, delta: f64) -> SweepPoint {
        SweepPoint {
            value,
            ttt_before: 100.0,
            ttt_after: 100.0 + delta,
            shares: vec![],
            path_costs: vec![],
            generated: 0.0,
            transfer_flows: vec![],
            mu: vec![],
            converged: true,
        }
    }

    fn series(points: Vec<SweepPoint>) -> SweepSeries {
        SweepSeries {
            parameter: "x".into(),
            modes: vec![],
            transfers: vec![],
            paths: vec![],
            points,
        }
    }

    #[test]
    fn crossover_interpolates() {
        let s = series(vec![pt(0.0, -2.0), pt(1.0, -1.0), pt(2.0, 3.0)]);
        assert!((s.crossover().unwrap() - 1.25).abs() < 1e-12);
        assert_eq!(series(vec![pt(0.0, 1.0)]).crossover(), None);
    }

    #[test]
    fn regions_cover_both_ends() {
        let s = series(vec![pt(0.0, 1.0), pt(1.0, -1.0), pt(2.0, -1.0), pt(3.0, 1.0)]);
        assert_eq!(s.paradox_regions(), vec![(0.0, 0.5), (2.5, 3.0)]);
        let s = series(vec![pt(0.0, -1.0), pt(1.0, 0.0)]);
        assert!(s.paradox_regions().is_empty());
    }

    #[test]
    fn grid_endpoints() {
        assert_eq!(grid(0.1, 0.9, 0.4).unwrap(), vec![0.1, 0.5, 0.9]);
        assert_eq!(grid(0.1, 0.9, 0.5).unwrap(), vec![0.1, 0.6]);
        assert_eq!(grid(100.0, 100.0, 5.0).unwrap(), vec![100.0]);
        assert!(grid(1.0, 0.0, 1.0).is_err());
    }
}
