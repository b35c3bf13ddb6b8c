use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use super::cost::LinkCostFn;
use super::paths::resolve_path;
use crate::equilibrium::SolverOptions;
use crate::error::{Error, Result};

/// Subnetworks whose links may carry an occupancy above one.
pub const AUTO_SUBNETWORKS: [&str; 2] = ["car", "auto"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Single,
    Combined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub subnetwork: String,
    pub cost: LinkCostFn,
    pub soft_capacity: Option<f64>,
    pub occupancy: f64,
}

impl Link {
    /// Travel time at passenger flow `v`.
    pub fn time(&self, v: f64) -> f64 {
        self.cost.time(v / self.occupancy)
    }

    /// `∫_0^v t(x / occupancy) dx`.
    pub fn integral(&self, v: f64) -> f64 {
        self.occupancy * self.cost.integral(v / self.occupancy)
    }

    pub fn derivative(&self, v: f64) -> f64 {
        self.cost.derivative(v / self.occupancy) / self.occupancy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub id: String,
    pub kind: ModeKind,
    /// Subnetworks traversed in order; one per leg.
    pub legs: Vec<String>,
    /// Subnetworks usable for access, egress and transfer walking.
    pub access: Vec<String>,
    pub transit: bool,
}

/// A candidate transfer facility: a dummy link from `node` to `to`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferCandidate {
    pub id: String,
    pub node: usize,
    pub to: usize,
    pub mode: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub fixed_cost: f64,
    pub unit_cost: f64,
    pub time: LinkCostFn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Link(usize),
    Transfer(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub id: String,
    pub origin: usize,
    pub destination: usize,
    pub mode: usize,
    pub nodes: Vec<usize>,
    pub steps: Vec<Step>,
}

impl Path {
    pub fn links(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().filter_map(|s| match s {
            Step::Link(a) => Some(*a),
            Step::Transfer(_) => None,
        })
    }

    pub fn transfers(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().filter_map(|s| match s {
            Step::Transfer(n) => Some(*n),
            Step::Link(_) => None,
        })
    }

    /// Link incidence vector of length `n_links`.
    pub fn link_incidence(&self, n_links: usize) -> Vec<bool> {
        let mut v = vec![false; n_links];
        for a in self.links() {
            v[a] = true;
        }
        v
    }

    /// Transfer incidence vector of length `n_transfers`.
    pub fn transfer_incidence(&self, n_transfers: usize) -> Vec<bool> {
        let mut v = vec![false; n_transfers];
        for n in self.transfers() {
            v[n] = true;
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdDemand {
    pub origin: usize,
    pub destination: usize,
    pub existing: f64,
    /// Existing demand per mode, used by the fixed-mode policy.
    pub mode_split: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OriginSpec {
    pub node: usize,
    pub existing: f64,
    pub max: f64,
}

/// Destination bounds plus the linear inverse demand `h(d) = a - b d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DestinationSpec {
    pub node: usize,
    pub existing: f64,
    pub max: f64,
    pub a: f64,
    pub b: f64,
}

impl DestinationSpec {
    pub fn h(&self, d: f64) -> f64 {
        self.a - self.b * d
    }

    pub fn h_integral(&self, d: f64) -> f64 {
        self.a * d - 0.5 * self.b * d * d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandSpec {
    pub od: Vec<OdDemand>,
    pub origins: Vec<OriginSpec>,
    pub destinations: Vec<DestinationSpec>,
}

impl DemandSpec {
    pub fn origin_index(&self, node: usize) -> Option<usize> {
        self.origins.iter().position(|o| o.node == node)
    }

    pub fn destination_index(&self, node: usize) -> Option<usize> {
        self.destinations.iter().position(|d| d.node == node)
    }

    pub fn total_existing(&self) -> f64 {
        self.od.iter().map(|q| q.existing).sum()
    }
}

/// Logit scales for routes, modes and destinations. Unset mode and
/// destination scales follow `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorParams {
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

impl BehaviorParams {
    pub fn new(theta: f64) -> Self {
        BehaviorParams {
            theta,
            gamma: None,
            eta: None,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(self.theta)
    }

    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or(self.theta)
    }

    fn check(&self) -> std::result::Result<(), String> {
        for (name, v) in [
            ("theta", Some(self.theta)),
            ("gamma", self.gamma),
            ("eta", self.eta),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(format!("behavior.{name} must be finite and > 0, got {v}"));
                }
            }
        }
        Ok(())
    }
}

/// How existing demand reacts to a new design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandPolicy {
    /// Existing trips keep their mode; only routes adapt.
    FixedMode,
    /// Existing OD totals are fixed; mode and route adapt.
    FixedTotal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub notes: Option<String>,
    pub nodes: Vec<String>,
    pub links: Vec<Link>,
    pub modes: Vec<Mode>,
    pub transfers: Vec<TransferCandidate>,
    pub paths: Vec<Path>,
    pub demand: DemandSpec,
    pub behavior: BehaviorParams,
    pub budget: f64,
    pub policy: DemandPolicy,
    /// Path-set size per OD pair and mode when no explicit paths are given.
    pub k_paths: usize,
    pub solver: SolverOptions,
}

impl Scenario {
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == id)
    }

    pub fn mode_index(&self, id: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.id == id)
    }

    pub fn transfer_index(&self, id: &str) -> Option<usize> {
        self.transfers.iter().position(|t| t.id == id)
    }

    pub fn link_index(&self, id: &str) -> Option<usize> {
        self.links.iter().position(|l| l.id == id)
    }

    pub fn with_behavior(&self, behavior: BehaviorParams) -> Scenario {
        Scenario {
            behavior,
            ..self.clone()
        }
    }

    pub fn subnetworks(&self) -> HashSet<&str> {
        self.links.iter().map(|l| l.subnetwork.as_str()).collect()
    }

    /// Re-run every invariant check on an in-memory scenario.
    pub fn validate(&self) -> Result<()> {
        let doc = ScenarioDoc::from(self);
        doc.into_scenario().map(|_| ())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ScenarioDoc::from(self))?)
    }
}

/// Read and validate a scenario file.
pub fn load_scenario(path: impl AsRef<FsPath>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.as_ref().display())))?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.into_scenario()
}

// ---------------------------------------------------------------------------
// Serialized form

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    notes: Option<String>,
    nodes: Vec<String>,
    links: Vec<LinkDoc>,
    modes: Vec<ModeDoc>,
    #[serde(default)]
    transfers: Vec<TransferDoc>,
    #[serde(default)]
    paths: Vec<PathDoc>,
    demand: DemandDoc,
    behavior: BehaviorParams,
    #[serde(default)]
    budget: f64,
    #[serde(default = "default_policy")]
    policy: DemandPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solver: Option<SolverOptions>,
}

fn default_policy() -> DemandPolicy {
    DemandPolicy::FixedTotal
}

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkDoc {
    id: String,
    from: String,
    to: String,
    subnetwork: String,
    cost: LinkCostFn,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    soft_capacity: Option<f64>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    occupancy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeDoc {
    id: String,
    kind: ModeKind,
    legs: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    access: Vec<String>,
    #[serde(default)]
    transit: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransferDoc {
    id: String,
    node: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    to: Option<String>,
    mode: String,
    c_min: f64,
    c_max: f64,
    #[serde(default)]
    fixed_cost: f64,
    #[serde(default)]
    unit_cost: f64,
    time: LinkCostFn,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathDoc {
    id: String,
    origin: String,
    destination: String,
    mode: String,
    nodes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    links: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemandDoc {
    od: Vec<OdDoc>,
    #[serde(default)]
    origins: Vec<OriginDoc>,
    #[serde(default)]
    destinations: Vec<DestinationDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OdDoc {
    origin: String,
    destination: String,
    #[serde(default)]
    existing: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mode_split: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OriginDoc {
    node: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    existing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DestinationDoc {
    node: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    existing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max: Option<f64>,
    #[serde(default)]
    a: f64,
    #[serde(default)]
    b: f64,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn finite_nonneg(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be finite and >= 0, got {v}")))
    }
}

fn unique<'a>(what: &str, ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if id.is_empty() {
            return Err(invalid(format!("empty {what} id")));
        }
        if !seen.insert(id) {
            return Err(invalid(format!("duplicate {what} id '{id}'")));
        }
    }
    Ok(())
}

impl ScenarioDoc {
    fn into_scenario(self) -> Result<Scenario> {
        unique("node", self.nodes.iter().map(String::as_str))?;
        let node_ix: HashMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let node = |what: &str, id: &str| -> Result<usize> {
            node_ix
                .get(id)
                .copied()
                .ok_or_else(|| invalid(format!("{what} references unknown node '{id}'")))
        };

        unique("link", self.links.iter().map(|l| l.id.as_str()))?;
        let mut links = Vec::with_capacity(self.links.len());
        for l in &self.links {
            let from = node(&format!("link {}", l.id), &l.from)?;
            let to = node(&format!("link {}", l.id), &l.to)?;
            if from == to {
                return Err(invalid(format!("link {} is a self-loop", l.id)));
            }
            if l.subnetwork.is_empty() {
                return Err(invalid(format!("link {} has no subnetwork", l.id)));
            }
            l.cost
                .check()
                .map_err(|e| invalid(format!("link {}: {e}", l.id)))?;
            if let Some(k) = l.soft_capacity {
                if !(k.is_finite() && k > 0.0) {
                    return Err(invalid(format!("link {}: soft capacity must be > 0", l.id)));
                }
            }
            if !(l.occupancy.is_finite() && l.occupancy >= 1.0) {
                return Err(invalid(format!("link {}: occupancy must be >= 1", l.id)));
            }
            if l.occupancy != 1.0 && !AUTO_SUBNETWORKS.contains(&l.subnetwork.as_str()) {
                return Err(invalid(format!(
                    "link {}: occupancy above 1 on non-auto subnetwork '{}'",
                    l.id, l.subnetwork
                )));
            }
            links.push(Link {
                id: l.id.clone(),
                from,
                to,
                subnetwork: l.subnetwork.clone(),
                cost: l.cost,
                soft_capacity: l.soft_capacity,
                occupancy: l.occupancy,
            });
        }
        let subnets: HashSet<&str> = links.iter().map(|l| l.subnetwork.as_str()).collect();

        unique("mode", self.modes.iter().map(|m| m.id.as_str()))?;
        let mut modes = Vec::with_capacity(self.modes.len());
        for m in &self.modes {
            match (m.kind, m.legs.len()) {
                (ModeKind::Single, 1) => {}
                (ModeKind::Combined, n) if n >= 2 => {}
                (kind, n) => {
                    return Err(invalid(format!(
                        "mode {}: {kind:?} mode cannot have {n} legs",
                        m.id
                    )))
                }
            }
            for s in m.legs.iter().chain(&m.access) {
                if !subnets.contains(s.as_str()) {
                    return Err(invalid(format!(
                        "mode {} references undeclared subnetwork '{s}'",
                        m.id
                    )));
                }
            }
            modes.push(Mode {
                id: m.id.clone(),
                kind: m.kind,
                legs: m.legs.clone(),
                access: m.access.clone(),
                transit: m.transit,
            });
        }
        let mode_ids: Vec<String> = modes.iter().map(|m| m.id.clone()).collect();
        let mode_ix = |what: &str, id: &str| -> Result<usize> {
            mode_ids
                .iter()
                .position(|m| m == id)
                .ok_or_else(|| invalid(format!("{what} references unknown mode '{id}'")))
        };

        unique("transfer", self.transfers.iter().map(|t| t.id.as_str()))?;
        let mut transfers = Vec::with_capacity(self.transfers.len());
        for t in &self.transfers {
            let what = format!("transfer {}", t.id);
            let at = node(&what, &t.node)?;
            let to = match &t.to {
                Some(n) => node(&what, n)?,
                None => at,
            };
            let mode = mode_ix(&what, &t.mode)?;
            if modes[mode].kind != ModeKind::Combined {
                return Err(invalid(format!("{what}: mode {} is not combined", t.mode)));
            }
            finite_nonneg(&format!("{what} c_min"), t.c_min)?;
            finite_nonneg(&format!("{what} c_max"), t.c_max)?;
            if t.c_min > t.c_max {
                return Err(invalid(format!("{what}: c_min exceeds c_max")));
            }
            finite_nonneg(&format!("{what} fixed_cost"), t.fixed_cost)?;
            finite_nonneg(&format!("{what} unit_cost"), t.unit_cost)?;
            t.time.check().map_err(|e| invalid(format!("{what}: {e}")))?;
            transfers.push(TransferCandidate {
                id: t.id.clone(),
                node: at,
                to,
                mode,
                c_min: t.c_min,
                c_max: t.c_max,
                fixed_cost: t.fixed_cost,
                unit_cost: t.unit_cost,
                time: t.time,
            });
        }

        self.behavior.check().map_err(invalid)?;
        finite_nonneg("budget", self.budget)?;

        let demand = self.demand_spec(&node_ix, &modes)?;

        let mut scenario = Scenario {
            notes: self.notes.clone(),
            nodes: self.nodes.clone(),
            links,
            modes,
            transfers,
            paths: Vec::new(),
            demand,
            behavior: self.behavior,
            budget: self.budget,
            policy: self.policy,
            k_paths: self.k_paths.unwrap_or(3),
            solver: self.solver.clone().unwrap_or_default(),
        };
        if scenario.k_paths == 0 {
            return Err(invalid("k_paths must be >= 1"));
        }
        scenario
            .solver
            .check()
            .map_err(|e| invalid(format!("solver: {e}")))?;

        unique("path", self.paths.iter().map(|p| p.id.as_str()))?;
        let mut paths = Vec::with_capacity(self.paths.len());
        for p in &self.paths {
            let what = format!("path {}", p.id);
            let origin = node(&what, &p.origin)?;
            let destination = node(&what, &p.destination)?;
            let mode = mode_ix(&what, &p.mode)?;
            let nodes = p
                .nodes
                .iter()
                .map(|n| node(&what, n))
                .collect::<Result<Vec<_>>>()?;
            let hint = match &p.links {
                Some(ids) => Some(
                    ids.iter()
                        .map(|id| {
                            scenario.link_index(id).ok_or_else(|| {
                                invalid(format!("{what} references unknown link '{id}'"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                ),
                None => None,
            };
            if nodes.first() != Some(&origin) || nodes.last() != Some(&destination) {
                return Err(invalid(format!(
                    "{what}: node sequence must run from origin to destination"
                )));
            }
            let steps = resolve_path(&scenario, mode, &nodes, hint.as_deref())
                .map_err(|e| invalid(format!("{what}: {e}")))?;
            paths.push(Path {
                id: p.id.clone(),
                origin,
                destination,
                mode,
                nodes,
                steps,
            });
        }
        scenario.paths = paths;
        Ok(scenario)
    }

    fn demand_spec(&self, node_ix: &HashMap<&str, usize>, modes: &[Mode]) -> Result<DemandSpec> {
        let node = |what: &str, id: &str| -> Result<usize> {
            node_ix
                .get(id)
                .copied()
                .ok_or_else(|| invalid(format!("{what} references unknown node '{id}'")))
        };
        let mut od = Vec::new();
        let mut seen = HashSet::new();
        for q in &self.demand.od {
            let what = format!("demand {}->{}", q.origin, q.destination);
            let origin = node(&what, &q.origin)?;
            let destination = node(&what, &q.destination)?;
            if origin == destination {
                return Err(invalid(format!("{what}: origin equals destination")));
            }
            if !seen.insert((origin, destination)) {
                return Err(invalid(format!("{what}: duplicate OD pair")));
            }
            finite_nonneg(&what, q.existing)?;
            let mode_split = match &q.mode_split {
                None => None,
                Some(map) => {
                    let mut split = vec![0.0; modes.len()];
                    for (m, v) in map {
                        let i = modes.iter().position(|x| &x.id == m).ok_or_else(|| {
                            invalid(format!("{what}: mode split names unknown mode '{m}'"))
                        })?;
                        finite_nonneg(&format!("{what} mode split"), *v)?;
                        split[i] = *v;
                    }
                    if !close(split.iter().sum(), q.existing) {
                        return Err(invalid(format!(
                            "{what}: mode split does not sum to existing demand"
                        )));
                    }
                    Some(split)
                }
            };
            if self.policy == DemandPolicy::FixedMode && mode_split.is_none() && q.existing > 0.0 {
                return Err(invalid(format!(
                    "{what}: fixed_mode policy needs a mode split for existing demand"
                )));
            }
            od.push(OdDemand {
                origin,
                destination,
                existing: q.existing,
                mode_split,
            });
        }

        let mut origins = Vec::new();
        for o in &self.demand.origins {
            let n = node("origin", &o.node)?;
            if origins.iter().any(|x: &OriginSpec| x.node == n) {
                return Err(invalid(format!("duplicate origin '{}'", o.node)));
            }
            let implied: f64 = od.iter().filter(|q| q.origin == n).map(|q| q.existing).sum();
            let existing = o.existing.unwrap_or(implied);
            finite_nonneg(&format!("origin {} existing", o.node), existing)?;
            if !close(existing, implied) {
                return Err(invalid(format!(
                    "origin {}: existing {existing} differs from OD sum {implied}",
                    o.node
                )));
            }
            let max = o.max.unwrap_or(existing);
            if !(max.is_finite() && max >= existing) {
                return Err(invalid(format!("origin {}: max below existing", o.node)));
            }
            origins.push(OriginSpec {
                node: n,
                existing,
                max,
            });
        }
        let mut destinations = Vec::new();
        for d in &self.demand.destinations {
            let n = node("destination", &d.node)?;
            if destinations.iter().any(|x: &DestinationSpec| x.node == n) {
                return Err(invalid(format!("duplicate destination '{}'", d.node)));
            }
            let implied: f64 = od
                .iter()
                .filter(|q| q.destination == n)
                .map(|q| q.existing)
                .sum();
            let existing = d.existing.unwrap_or(implied);
            finite_nonneg(&format!("destination {} existing", d.node), existing)?;
            if !close(existing, implied) {
                return Err(invalid(format!(
                    "destination {}: existing {existing} differs from OD sum {implied}",
                    d.node
                )));
            }
            let max = d.max.unwrap_or(f64::INFINITY);
            if max.is_nan() || max < existing {
                return Err(invalid(format!("destination {}: max below existing", d.node)));
            }
            if !d.a.is_finite() || !(d.b.is_finite() && d.b >= 0.0) {
                return Err(invalid(format!(
                    "destination {}: inverse demand needs finite a and b >= 0",
                    d.node
                )));
            }
            destinations.push(DestinationSpec {
                node: n,
                existing,
                max,
                a: d.a,
                b: d.b,
            });
        }
        // Origins and destinations without an explicit entry cannot grow.
        for q in &od {
            if !origins.iter().any(|o| o.node == q.origin) {
                let e: f64 = od.iter().filter(|x| x.origin == q.origin).map(|x| x.existing).sum();
                origins.push(OriginSpec {
                    node: q.origin,
                    existing: e,
                    max: e,
                });
            }
            if !destinations.iter().any(|d| d.node == q.destination) {
                let e: f64 = od
                    .iter()
                    .filter(|x| x.destination == q.destination)
                    .map(|x| x.existing)
                    .sum();
                destinations.push(DestinationSpec {
                    node: q.destination,
                    existing: e,
                    max: f64::INFINITY,
                    a: 0.0,
                    b: 0.0,
                });
            }
        }
        Ok(DemandSpec {
            od,
            origins,
            destinations,
        })
    }
}

impl From<&Scenario> for ScenarioDoc {
    fn from(s: &Scenario) -> Self {
        let name = |i: usize| s.nodes[i].clone();
        ScenarioDoc {
            notes: s.notes.clone(),
            nodes: s.nodes.clone(),
            links: s
                .links
                .iter()
                .map(|l| LinkDoc {
                    id: l.id.clone(),
                    from: name(l.from),
                    to: name(l.to),
                    subnetwork: l.subnetwork.clone(),
                    cost: l.cost,
                    soft_capacity: l.soft_capacity,
                    occupancy: l.occupancy,
                })
                .collect(),
            modes: s
                .modes
                .iter()
                .map(|m| ModeDoc {
                    id: m.id.clone(),
                    kind: m.kind,
                    legs: m.legs.clone(),
                    access: m.access.clone(),
                    transit: m.transit,
                })
                .collect(),
            transfers: s
                .transfers
                .iter()
                .map(|t| TransferDoc {
                    id: t.id.clone(),
                    node: name(t.node),
                    to: (t.to != t.node).then(|| name(t.to)),
                    mode: s.modes[t.mode].id.clone(),
                    c_min: t.c_min,
                    c_max: t.c_max,
                    fixed_cost: t.fixed_cost,
                    unit_cost: t.unit_cost,
                    time: t.time,
                })
                .collect(),
            paths: s
                .paths
                .iter()
                .map(|p| PathDoc {
                    id: p.id.clone(),
                    origin: name(p.origin),
                    destination: name(p.destination),
                    mode: s.modes[p.mode].id.clone(),
                    nodes: p.nodes.iter().map(|&n| name(n)).collect(),
                    links: Some(p.links().map(|a| s.links[a].id.clone()).collect()),
                })
                .collect(),
            demand: DemandDoc {
                od: s
                    .demand
                    .od
                    .iter()
                    .map(|q| OdDoc {
                        origin: name(q.origin),
                        destination: name(q.destination),
                        existing: q.existing,
                        mode_split: q.mode_split.as_ref().map(|split| {
                            split
                                .iter()
                                .enumerate()
                                .filter(|(_, v)| **v > 0.0)
                                .map(|(i, v)| (s.modes[i].id.clone(), *v))
                                .collect()
                        }),
                    })
                    .collect(),
                origins: s
                    .demand
                    .origins
                    .iter()
                    .map(|o| OriginDoc {
                        node: name(o.node),
                        existing: Some(o.existing),
                        max: Some(o.max),
                    })
                    .collect(),
                destinations: s
                    .demand
                    .destinations
                    .iter()
                    .map(|d| DestinationDoc {
                        node: name(d.node),
                        existing: Some(d.existing),
                        max: d.max.is_finite().then_some(d.max),
                        a: d.a,
                        b: d.b,
                    })
                    .collect(),
            },
            behavior: s.behavior,
            budget: s.budget,
            policy: s.policy,
            k_paths: Some(s.k_paths),
            solver: Some(s.solver.clone()),
        }
    }
}
