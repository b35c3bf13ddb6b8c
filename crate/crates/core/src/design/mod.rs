//! Upper level: construction cost, budget feasibility, fitness and the
//! genetic search over transfer locations and capacities.

mod ga;
mod io;

use serde::{Deserialize, Serialize};

pub use ga::{enumerate_designs, ga_solve, Chromosome, GaParams, GaResult, GenerationStats, InfeasiblePolicy};
pub use io::{design_from_json, design_to_json, load_design, write_best_design, write_ga_history};

use crate::equilibrium::{solve_lower_level, EquilibriumState, SolverOptions};
use crate::error::Result;
use crate::netmodel::{apply_design, Scenario};

/// Open/close decision and capacity for one transfer candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferDecision {
    pub open: bool,
    pub capacity: f64,
}

/// One decision per transfer candidate, in scenario order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub decisions: Vec<TransferDecision>,
}

impl Design {
    /// Every candidate closed.
    pub fn closed(scenario: &Scenario) -> Self {
        Design {
            decisions: vec![
                TransferDecision {
                    open: false,
                    capacity: 0.0
                };
                scenario.transfers.len()
            ],
        }
    }

    /// Every candidate open at its largest capacity.
    pub fn all_open(scenario: &Scenario) -> Self {
        Design {
            decisions: scenario
                .transfers
                .iter()
                .map(|t| TransferDecision {
                    open: true,
                    capacity: t.c_max,
                })
                .collect(),
        }
    }

    /// Candidate capacities in scenario order; zero closes a candidate.
    pub fn from_capacities(capacities: &[f64]) -> Self {
        Design {
            decisions: capacities
                .iter()
                .map(|&c| TransferDecision {
                    open: c > 0.0,
                    capacity: c,
                })
                .collect(),
        }
    }

    pub fn with(mut self, candidate: usize, open: bool, capacity: f64) -> Self {
        self.decisions[candidate] = TransferDecision { open, capacity };
        self
    }
}

/// Fixed and per-unit construction costs with the budget.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub budget: f64,
    pub fixed: Vec<f64>,
    pub unit: Vec<f64>,
}

impl CostModel {
    pub fn from_scenario(s: &Scenario) -> Self {
        CostModel {
            budget: s.budget,
            fixed: s.transfers.iter().map(|t| t.fixed_cost).collect(),
            unit: s.transfers.iter().map(|t| t.unit_cost).collect(),
        }
    }
}

/// `Σ fixed ξ + unit c̄` over open candidates.
pub fn construction_cost(costs: &CostModel, design: &Design) -> f64 {
    design
        .decisions
        .iter()
        .enumerate()
        .filter(|(_, d)| d.open)
        .map(|(n, d)| costs.fixed[n] + costs.unit[n] * d.capacity)
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Budget { cost: f64, budget: f64 },
    CapacityBounds { candidate: String, capacity: f64, min: f64, max: f64 },
    ClosedWithCapacity { candidate: String, capacity: f64 },
    Shape { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub cost: f64,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Budget and capacity-bound checks for a design.
pub fn check_feasible(scenario: &Scenario, design: &Design) -> FeasibilityReport {
    let mut rep = FeasibilityReport::default();
    if design.decisions.len() != scenario.transfers.len() {
        rep.violations.push(Violation::Shape {
            expected: scenario.transfers.len(),
            found: design.decisions.len(),
        });
        return rep;
    }
    let costs = CostModel::from_scenario(scenario);
    rep.cost = construction_cost(&costs, design);
    if rep.cost > costs.budget * (1.0 + 1e-12) {
        rep.violations.push(Violation::Budget {
            cost: rep.cost,
            budget: costs.budget,
        });
    }
    for (d, t) in design.decisions.iter().zip(&scenario.transfers) {
        if d.open {
            if !(d.capacity >= t.c_min && d.capacity <= t.c_max) {
                rep.violations.push(Violation::CapacityBounds {
                    candidate: t.id.clone(),
                    capacity: d.capacity,
                    min: t.c_min,
                    max: t.c_max,
                });
            }
        } else if d.capacity != 0.0 {
            rep.violations.push(Violation::ClosedWithCapacity {
                candidate: t.id.clone(),
                capacity: d.capacity,
            });
        }
    }
    rep
}

/// Lower-level outcome of a design.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Generated new trips.
    pub trips: f64,
    pub converged: bool,
    pub state: EquilibriumState,
}

/// Solve the lower level for `design` and report the generated new demand.
pub fn fitness(scenario: &Scenario, design: &Design, opts: &SolverOptions) -> Result<Evaluation> {
    let net = apply_design(scenario, design)?;
    let state = solve_lower_level(&net, &scenario.behavior, opts)?;
    Ok(Evaluation {
        trips: state.generated(),
        converged: state.converged,
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_is_linear_in_capacity() {
        let costs = CostModel {
            budget: 22_500_000.0,
            fixed: vec![0.0, 0.0],
            unit: vec![12_500.0, 25_000.0],
        };
        let d = Design::from_capacities(&[400.0, 700.0]);
        assert_eq!(construction_cost(&costs, &d), 22_500_000.0);
        let d = Design::from_capacities(&[900.0, 450.0]);
        assert_eq!(construction_cost(&costs, &d), 22_500_000.0);
        let d = Design::from_capacities(&[0.0, 0.0]);
        assert_eq!(construction_cost(&costs, &d), 0.0);
    }
}
