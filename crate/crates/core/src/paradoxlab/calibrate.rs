use rayon::prelude::*;

use crate::design::Design;
use crate::equilibrium::{solve_lower_level, SolverOptions};
use crate::error::{Error, Result};
use crate::netmodel::{apply_design, LinkCostFn, Scenario, AUTO_SUBNETWORKS};
use crate::numeric::brent;

/// Scenario parameter the calibration may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeParam {
    Theta,
    /// Free-flow time of one transfer candidate.
    TransferTime(usize),
    /// Occupancy of every car link.
    Occupancy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRange {
    pub param: FreeParam,
    pub lo: f64,
    pub hi: f64,
}

/// Observed path flows (by path id) and total travel time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Targets {
    pub flows: Vec<(String, f64)>,
    pub ttt: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Calibration {
    /// Fitted value per free parameter, in input order.
    pub values: Vec<f64>,
    /// Sum of squared relative errors over all targets.
    pub residual: f64,
    /// Residual above [`Calibration::POOR`].
    pub poor: bool,
    pub evaluations: usize,
    /// Input scenario with the fitted values applied.
    pub scenario: Scenario,
}

impl Calibration {
    pub const POOR: f64 = 1e-4;
}

fn current(s: &Scenario, p: FreeParam) -> Result<f64> {
    Ok(match p {
        FreeParam::Theta => s.behavior.theta,
        FreeParam::TransferTime(n) => {
            let t = s
                .transfers
                .get(n)
                .ok_or_else(|| Error::Argument(format!("no transfer candidate #{n}")))?;
            t.time.free_flow()
        }
        FreeParam::Occupancy => s
            .links
            .iter()
            .find(|l| AUTO_SUBNETWORKS.contains(&l.subnetwork.as_str()))
            .map_or(1.0, |l| l.occupancy),
    })
}

fn set(s: &mut Scenario, p: FreeParam, v: f64) {
    match p {
        FreeParam::Theta => s.behavior.theta = v,
        FreeParam::TransferTime(n) => match &mut s.transfers[n].time {
            LinkCostFn::Constant { t0 } | LinkCostFn::Poly { t0, .. } => *t0 = v,
        },
        FreeParam::Occupancy => {
            for l in s
                .links
                .iter_mut()
                .filter(|l| AUTO_SUBNETWORKS.contains(&l.subnetwork.as_str()))
            {
                l.occupancy = v;
            }
        }
    }
}

fn with_values(base: &Scenario, free: &[ParamRange], x: &[f64]) -> Scenario {
    let mut s = base.clone();
    for (r, &v) in free.iter().zip(x) {
        set(&mut s, r.param, v);
    }
    s
}

fn residual(s: &Scenario, design: &Design, targets: &Targets, opts: &SolverOptions) -> Result<f64> {
    let net = apply_design(s, design)?;
    let st = solve_lower_level(&net, &s.behavior, opts)?;
    let mut r = 0.0;
    for (id, target) in &targets.flows {
        let got = net
            .paths
            .iter()
            .position(|p| &p.id == id)
            .map_or(0.0, |p| st.path_flow(p));
        r += ((got - target) / target.abs().max(1.0)).powi(2);
    }
    if let Some(t) = targets.ttt {
        r += ((st.ttt - t) / t.abs().max(1.0)).powi(2);
    }
    Ok(r)
}

const GRID: usize = 11;
const GOLDEN_ITERS: usize = 40;

/// Fit the free parameters to the targets by coordinate search on a
/// bounded grid followed by golden-section refinement of each coordinate.
/// Moves are accepted only on strict improvement, so a flat residual keeps
/// the scenario's values. Deterministic.
pub fn calibrate(
    scenario: &Scenario,
    design: &Design,
    targets: &Targets,
    free: &[ParamRange],
    opts: &SolverOptions,
) -> Result<Calibration> {
    for r in free {
        if !(r.lo.is_finite() && r.hi.is_finite() && r.lo <= r.hi) {
            return Err(Error::Argument(format!("bad range {:?}", r)));
        }
        current(scenario, r.param)?;
    }
    for (id, t) in &targets.flows {
        if !t.is_finite() {
            return Err(Error::Argument(format!("target for path {id} is not finite")));
        }
    }
    let mut evaluations = 0usize;
    let mut eval = |xs: &[Vec<f64>]| -> Result<Vec<f64>> {
        evaluations += xs.len();
        xs.par_iter()
            .map(|x| {
                let s = with_values(scenario, free, x);
                s.validate()?;
                residual(&s, design, targets, opts)
            })
            .collect()
    };
    let better = |new: f64, old: f64| new < old * (1.0 - 1e-6) - 1e-15;

    let mut x: Vec<f64> = free
        .iter()
        .map(|r| current(scenario, r.param).map(|v| v.clamp(r.lo, r.hi)))
        .collect::<Result<_>>()?;
    let mut best = eval(&[x.clone()])?[0];

    for _pass in 0..10 {
        let mut moved = false;
        for (i, r) in free.iter().enumerate() {
            let trial: Vec<Vec<f64>> = (0..GRID)
                .map(|k| {
                    let mut y = x.clone();
                    y[i] = r.lo + (r.hi - r.lo) * k as f64 / (GRID - 1) as f64;
                    y
                })
                .collect();
            let res = eval(&trial)?;
            let (k, &rk) = res
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
                .expect("grid is non-empty");
            if better(rk, best) {
                x = trial[k].clone();
                best = rk;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }

    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _pass in 0..2 {
        for (i, r) in free.iter().enumerate() {
            let h = (r.hi - r.lo) / (GRID - 1) as f64;
            if h <= 0.0 {
                continue;
            }
            let (mut a, mut b) = ((x[i] - h).max(r.lo), (x[i] + h).min(r.hi));
            let at = |v: f64| {
                let mut y = x.clone();
                y[i] = v;
                y
            };
            let mut c = b - phi * (b - a);
            let mut d = a + phi * (b - a);
            let mut fc_fd = eval(&[at(c), at(d)])?;
            for _ in 0..GOLDEN_ITERS {
                if fc_fd[0] <= fc_fd[1] {
                    b = d;
                    d = c;
                    c = b - phi * (b - a);
                    fc_fd = vec![eval(&[at(c)])?[0], fc_fd[0]];
                } else {
                    a = c;
                    c = d;
                    d = a + phi * (b - a);
                    fc_fd = vec![fc_fd[1], eval(&[at(d)])?[0]];
                }
            }
            let (v, f) = if fc_fd[0] <= fc_fd[1] {
                (c, fc_fd[0])
            } else {
                (d, fc_fd[1])
            };
            if better(f, best) {
                x[i] = v;
                best = f;
            }
        }
    }

    Ok(Calibration {
        scenario: with_values(scenario, free, &x),
        values: x,
        residual: best,
        poor: best > Calibration::POOR,
        evaluations,
    })
}

/// Free-flow time of `candidate` at which the after state (candidate open
/// at `capacity`) has the same TTT as the all-closed state under the
/// scenario's behavior. Requires a sign change on `[lo, hi]`.
pub fn paradox_threshold_time(
    scenario: &Scenario,
    candidate: usize,
    capacity: f64,
    lo: f64,
    hi: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    if candidate >= scenario.transfers.len() {
        return Err(Error::Argument(format!("no transfer candidate #{candidate}")));
    }
    let before = {
        let net = apply_design(scenario, &Design::closed(scenario))?;
        solve_lower_level(&net, &scenario.behavior, opts)?.ttt
    };
    let design = Design::closed(scenario).with(candidate, true, capacity);
    let delta = |tau: f64| -> Result<f64> {
        let mut s = scenario.clone();
        set(&mut s, FreeParam::TransferTime(candidate), tau);
        let net = apply_design(&s, &design)?;
        Ok(solve_lower_level(&net, &s.behavior, opts)?.ttt - before)
    };
    let (f_lo, f_hi) = (delta(lo)?, delta(hi)?);
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Argument(format!(
            "no TTT crossing between transfer times {lo} and {hi}"
        )));
    }
    let mut err = None;
    let tau = brent(
        |t| match delta(t) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        lo,
        hi,
        f_lo,
        f_hi,
        1e-10 * (1.0 + hi.abs()),
        200,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(tau),
    }
}
