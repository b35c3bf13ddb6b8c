use super::paths::enumerate_paths;
use super::scenario::{Path, Scenario};
use crate::design::Design;
use crate::error::{Error, Result};

/// Paths of one mode inside an OD block.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBlock {
    pub mode: usize,
    pub paths: Vec<usize>,
}

/// Everything the solver needs about one OD pair.
#[derive(Debug, Clone, PartialEq)]
pub struct OdBlock {
    /// Index into `scenario.demand.od`.
    pub od: usize,
    /// Index into `scenario.demand.origins`.
    pub origin: usize,
    /// Index into `scenario.demand.destinations`.
    pub destination: usize,
    pub modes: Vec<ModeBlock>,
}

impl OdBlock {
    pub fn mode_block(&self, mode: usize) -> Option<&ModeBlock> {
        self.modes.iter().find(|m| m.mode == mode)
    }
}

/// A scenario with one design applied: closed candidates and the paths
/// that need them are gone.
#[derive(Debug, Clone)]
pub struct ActiveNetwork<'a> {
    pub scenario: &'a Scenario,
    pub design: Design,
    pub paths: Vec<Path>,
    pub blocks: Vec<OdBlock>,
    /// Capacity of each open transfer candidate, `None` when closed.
    pub capacity: Vec<Option<f64>>,
}

impl ActiveNetwork<'_> {
    pub fn is_open(&self, candidate: usize) -> bool {
        self.capacity[candidate].is_some()
    }

    pub fn n_links(&self) -> usize {
        self.scenario.links.len()
    }

    pub fn n_transfers(&self) -> usize {
        self.scenario.transfers.len()
    }
}

/// Apply a design, pruning paths through candidates that are closed or
/// opened with zero capacity.
pub fn apply_design<'a>(scenario: &'a Scenario, design: &Design) -> Result<ActiveNetwork<'a>> {
    if design.decisions.len() != scenario.transfers.len() {
        return Err(Error::Design(format!(
            "design has {} decisions, scenario has {} transfer candidates",
            design.decisions.len(),
            scenario.transfers.len()
        )));
    }
    let mut capacity = Vec::with_capacity(design.decisions.len());
    for (d, t) in design.decisions.iter().zip(&scenario.transfers) {
        if !(d.capacity.is_finite() && d.capacity >= 0.0) {
            return Err(Error::Design(format!(
                "capacity of {} must be finite and >= 0",
                t.id
            )));
        }
        if d.open {
            let tol = 1e-9 * t.c_max.max(1.0);
            if d.capacity < t.c_min - tol || d.capacity > t.c_max + tol {
                return Err(Error::Design(format!(
                    "capacity {} of {} outside [{}, {}]",
                    d.capacity, t.id, t.c_min, t.c_max
                )));
            }
        }
        capacity.push((d.open && d.capacity > 0.0).then_some(d.capacity));
    }

    let mut paths = Vec::new();
    let mut blocks = Vec::with_capacity(scenario.demand.od.len());
    for (i, q) in scenario.demand.od.iter().enumerate() {
        let mut modes = Vec::new();
        for m in 0..scenario.modes.len() {
            let mut ids = Vec::new();
            for p in enumerate_paths(scenario, q.origin, q.destination, m, scenario.k_paths) {
                if p.transfers().all(|n| capacity[n].is_some()) {
                    ids.push(paths.len());
                    paths.push(p);
                }
            }
            if !ids.is_empty() {
                modes.push(ModeBlock { mode: m, paths: ids });
            }
        }
        blocks.push(OdBlock {
            od: i,
            origin: scenario
                .demand
                .origin_index(q.origin)
                .expect("validated origin"),
            destination: scenario
                .demand
                .destination_index(q.destination)
                .expect("validated destination"),
            modes,
        });
    }
    Ok(ActiveNetwork {
        scenario,
        design: design.clone(),
        paths,
        blocks,
        capacity,
    })
}
