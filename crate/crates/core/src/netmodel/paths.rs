use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::scenario::{Path, Scenario, Step};

/// Turn a node sequence into link and transfer steps for `mode`.
///
/// Consecutive nodes must be joined by exactly one admissible link (a leg
/// link, or an access link) or by a transfer of the mode. `hint` pins the
/// link sequence when the nodes alone are ambiguous.
pub(crate) fn resolve_path(
    scenario: &Scenario,
    mode: usize,
    nodes: &[usize],
    hint: Option<&[usize]>,
) -> Result<Vec<Step>, String> {
    if nodes.len() < 2 {
        return Err("needs at least two nodes".into());
    }
    let mut seen = HashSet::new();
    for &n in nodes {
        if !seen.insert(n) {
            return Err(format!("revisits node '{}'", scenario.nodes[n]));
        }
    }
    let mut found = Vec::new();
    let mut steps = Vec::new();
    resolve_rec(
        scenario, mode, nodes, hint, 0, 0, false, 0, &mut steps, &mut found,
    );
    match found.len() {
        0 => Err(format!(
            "no {} route through {}",
            scenario.modes[mode].id,
            nodes
                .iter()
                .map(|&n| scenario.nodes[n].as_str())
                .collect::<Vec<_>>()
                .join("-")
        )),
        1 => Ok(found.pop().unwrap()),
        _ => Err("ambiguous node sequence; list its links explicitly".into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn resolve_rec(
    s: &Scenario,
    mode: usize,
    nodes: &[usize],
    hint: Option<&[usize]>,
    pos: usize,
    leg: usize,
    leg_used: bool,
    h: usize,
    steps: &mut Vec<Step>,
    found: &mut Vec<Vec<Step>>,
) {
    if found.len() > 1 {
        return;
    }
    let m = &s.modes[mode];
    let u = nodes[pos];
    if pos + 1 == nodes.len() {
        let hint_done = hint.map_or(true, |h_ids| h == h_ids.len());
        if leg + 1 == m.legs.len() && leg_used && hint_done {
            found.push(steps.clone());
        }
        return;
    }
    let v = nodes[pos + 1];
    for (a, link) in s.links.iter().enumerate() {
        if link.from != u || link.to != v {
            continue;
        }
        let own = link.subnetwork == m.legs[leg];
        if !own && !m.access.contains(&link.subnetwork) {
            continue;
        }
        if let Some(ids) = hint {
            if ids.get(h) != Some(&a) {
                continue;
            }
        }
        steps.push(Step::Link(a));
        resolve_rec(s, mode, nodes, hint, pos + 1, leg, leg_used || own, h + 1, steps, found);
        steps.pop();
    }
    if leg + 1 < m.legs.len() && leg_used {
        for (t, cand) in s.transfers.iter().enumerate() {
            if cand.mode != mode || cand.node != u {
                continue;
            }
            if cand.to == u {
                steps.push(Step::Transfer(t));
                resolve_rec(s, mode, nodes, hint, pos, leg + 1, false, h, steps, found);
                steps.pop();
            } else if cand.to == v {
                steps.push(Step::Transfer(t));
                resolve_rec(s, mode, nodes, hint, pos + 1, leg + 1, false, h, steps, found);
                steps.pop();
            }
        }
    }
}

/// Free-flow cost of a step sequence.
pub fn free_flow_cost(scenario: &Scenario, steps: &[Step]) -> f64 {
    steps
        .iter()
        .map(|s| match *s {
            Step::Link(a) => scenario.links[a].time(0.0),
            Step::Transfer(n) => scenario.transfers[n].time.time(0.0),
        })
        .sum()
}

/// Path set of one OD pair and mode.
///
/// Explicit scenario paths are returned verbatim. Otherwise the `k`
/// cheapest loop-free paths at free-flow cost are generated, honoring the
/// mode's leg sequence and its transfer candidates; ties are broken by the
/// node-id sequence.
pub fn enumerate_paths(
    scenario: &Scenario,
    origin: usize,
    destination: usize,
    mode: usize,
    k: usize,
) -> Vec<Path> {
    if !scenario.paths.is_empty() {
        return scenario
            .paths
            .iter()
            .filter(|p| p.origin == origin && p.destination == destination && p.mode == mode)
            .cloned()
            .collect();
    }
    if k == 0 || origin == destination {
        return Vec::new();
    }
    let m = &scenario.modes[mode];
    let usable = |sub: &str| m.legs.iter().any(|l| l == sub) || m.access.iter().any(|l| l == sub);
    let bound = distance_to(scenario, destination, &usable);
    if !bound[origin].is_finite() {
        return Vec::new();
    }
    let mut search = Search {
        s: scenario,
        mode,
        destination,
        k,
        bound,
        best: Vec::new(),
        nodes: vec![origin],
        steps: Vec::new(),
        on_path: vec![false; scenario.nodes.len()],
    };
    search.on_path[origin] = true;
    search.dfs(origin, 0, false, 0.0);
    let mut best = search.best;
    best.sort_by(|a, b| cmp_candidate(scenario, a, b));
    best.into_iter()
        .enumerate()
        .map(|(rank, c)| Path {
            id: format!(
                "{}:{}-{}:{}",
                m.id,
                scenario.nodes[origin],
                scenario.nodes[destination],
                rank + 1
            ),
            origin,
            destination,
            mode,
            nodes: c.nodes,
            steps: c.steps,
        })
        .collect()
}

struct Candidate {
    cost: f64,
    nodes: Vec<usize>,
    steps: Vec<Step>,
}

fn cmp_candidate(s: &Scenario, a: &Candidate, b: &Candidate) -> Ordering {
    a.cost.total_cmp(&b.cost).then_with(|| {
        let na = a.nodes.iter().map(|&n| s.nodes[n].as_str());
        let nb = b.nodes.iter().map(|&n| s.nodes[n].as_str());
        na.cmp(nb).then_with(|| a.steps.len().cmp(&b.steps.len()))
    })
}

struct Search<'a> {
    s: &'a Scenario,
    mode: usize,
    destination: usize,
    k: usize,
    bound: Vec<f64>,
    best: Vec<Candidate>,
    nodes: Vec<usize>,
    steps: Vec<Step>,
    on_path: Vec<bool>,
}

impl Search<'_> {
    fn worst_kept(&self) -> Option<f64> {
        if self.best.len() < self.k {
            None
        } else {
            self.best.iter().map(|c| c.cost).max_by(f64::total_cmp)
        }
    }

    fn offer(&mut self, cost: f64) {
        let cand = Candidate {
            cost,
            nodes: self.nodes.clone(),
            steps: self.steps.clone(),
        };
        self.best.push(cand);
        if self.best.len() > self.k {
            let s = self.s;
            self.best.sort_by(|a, b| cmp_candidate(s, a, b));
            self.best.truncate(self.k);
        }
    }

    fn dfs(&mut self, u: usize, leg: usize, leg_used: bool, cost: f64) {
        if let Some(w) = self.worst_kept() {
            if cost + self.bound[u] > w * (1.0 + 1e-12) + 1e-12 {
                return;
            }
        }
        let m = &self.s.modes[self.mode];
        let last_leg = leg + 1 == m.legs.len();
        if u == self.destination {
            if last_leg && leg_used {
                self.offer(cost);
            }
            return;
        }
        for a in 0..self.s.links.len() {
            let link = &self.s.links[a];
            if link.from != u || self.on_path[link.to] {
                continue;
            }
            let own = link.subnetwork == m.legs[leg];
            if !own && !m.access.contains(&link.subnetwork) {
                continue;
            }
            let v = link.to;
            let c = link.time(0.0);
            self.on_path[v] = true;
            self.nodes.push(v);
            self.steps.push(Step::Link(a));
            self.dfs(v, leg, leg_used || own, cost + c);
            self.steps.pop();
            self.nodes.pop();
            self.on_path[v] = false;
        }
        if !last_leg && leg_used {
            for t in 0..self.s.transfers.len() {
                let cand = &self.s.transfers[t];
                if cand.mode != self.mode || cand.node != u {
                    continue;
                }
                let c = cand.time.time(0.0);
                self.steps.push(Step::Transfer(t));
                if cand.to == u {
                    self.dfs(u, leg + 1, false, cost + c);
                } else if !self.on_path[cand.to] {
                    let v = cand.to;
                    self.on_path[v] = true;
                    self.nodes.push(v);
                    self.dfs(v, leg + 1, false, cost + c);
                    self.nodes.pop();
                    self.on_path[v] = false;
                }
                self.steps.pop();
            }
        }
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Reverse Dijkstra over usable links (transfers treated as free and
/// unrestricted), giving an admissible bound on the remaining cost.
fn distance_to(s: &Scenario, target: usize, usable: &dyn Fn(&str) -> bool) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; s.nodes.len()];
    let mut heap = BinaryHeap::new();
    dist[target] = 0.0;
    heap.push(Entry(0.0, target));
    while let Some(Entry(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        let relax = |u: usize, w: f64, dist: &mut Vec<f64>, heap: &mut BinaryHeap<Entry>| {
            if d + w < dist[u] {
                dist[u] = d + w;
                heap.push(Entry(d + w, u));
            }
        };
        for link in &s.links {
            if link.to == v && usable(&link.subnetwork) {
                relax(link.from, link.time(0.0), &mut dist, &mut heap);
            }
        }
        for t in &s.transfers {
            if t.to == v && t.node != v {
                relax(t.node, 0.0, &mut dist, &mut heap);
            }
        }
    }
    dist
}
