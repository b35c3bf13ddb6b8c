//! Lower-level combined trip-distribution, mode and route equilibrium with
//! capacitated transfers.

mod generation;
mod kkt;
mod logit;
mod model;
mod output;
mod solver;

use serde::{Deserialize, Serialize};

pub use kkt::{kkt_check, KktReport};
pub use logit::{logit_split, logsum};
pub use model::{ObjectiveBreakdown, PathFlows};
pub use output::write_bundle;
pub use solver::{
    auxiliary_demand, objective_value, path_cost, solve_lower_level, total_travel_time,
    EquilibriumState, MeritRecord,
};

use crate::netmodel::Link;

/// Travel time of `link` at passenger flow `v`.
pub fn link_time(link: &Link, v: f64) -> f64 {
    link.time(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepRule {
    /// Step `1/k` at inner iteration `k`.
    Msa,
    /// Backtracking from a unit step until sufficient decrease holds.
    Armijo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub step_rule: StepRule,
    /// Stop when route, mode and generation shares of the current flows
    /// and of their logit target agree to this tolerance.
    pub tolerance: f64,
    /// Inner iterations summed over all outer rounds.
    pub max_inner: usize,
    pub max_outer: usize,
    /// Relative tolerance on transfer capacities and complementarity.
    pub capacity_tolerance: f64,
    pub penalty_init: f64,
    pub penalty_growth: f64,
    pub penalty_max: f64,
    /// Sufficient-decrease constant of the Armijo rule.
    pub armijo_c1: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            step_rule: StepRule::Armijo,
            tolerance: 1e-10,
            max_inner: 200_000,
            max_outer: 100,
            capacity_tolerance: 1e-8,
            penalty_init: 1e-2,
            penalty_growth: 2.0,
            penalty_max: 10.0,
            armijo_c1: 1e-4,
        }
    }
}

impl SolverOptions {
    pub(crate) fn check(&self) -> Result<(), String> {
        let positive = [
            ("tolerance", self.tolerance),
            ("capacity_tolerance", self.capacity_tolerance),
            ("penalty_init", self.penalty_init),
            ("penalty_max", self.penalty_max),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be finite and > 0"));
            }
        }
        if !(self.penalty_growth >= 1.0) {
            return Err("penalty_growth must be >= 1".into());
        }
        if !(self.armijo_c1 > 0.0 && self.armijo_c1 < 1.0) {
            return Err("armijo_c1 must lie in (0, 1)".into());
        }
        if self.max_inner == 0 || self.max_outer == 0 {
            return Err("iteration limits must be >= 1".into());
        }
        Ok(())
    }
}
