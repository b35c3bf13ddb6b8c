use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{construction_cost, fitness, CostModel, Design, TransferDecision};
use crate::equilibrium::{EquilibriumState, SolverOptions};
use crate::error::{Error, Result};
use crate::netmodel::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfeasiblePolicy {
    /// Scale capacities down (closing candidates if needed) until affordable.
    Repair,
    /// Keep the design and subtract `penalty_weight * (G - B)`.
    Penalty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub crossover: f64,
    pub mutation: f64,
    pub tournament: usize,
    pub elitism: usize,
    /// Capacity discretization step.
    pub step: f64,
    pub seed: u64,
    pub infeasible: InfeasiblePolicy,
    pub penalty_weight: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: 30,
            generations: 100,
            crossover: 0.8,
            mutation: 0.1,
            tournament: 3,
            elitism: 2,
            step: 50.0,
            seed: 42,
            infeasible: InfeasiblePolicy::Repair,
            penalty_weight: 1.0,
        }
    }
}

impl GaParams {
    fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Argument(m.to_string()));
        if self.population < 2 {
            return bad("population must be >= 2");
        }
        if self.elitism >= self.population {
            return bad("elitism must be below the population size");
        }
        if self.tournament == 0 {
            return bad("tournament size must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.crossover) || !(0.0..=1.0).contains(&self.mutation) {
            return bad("crossover and mutation rates must lie in [0, 1]");
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return bad("capacity step must be > 0");
        }
        if !(self.penalty_weight.is_finite() && self.penalty_weight >= 0.0) {
            return bad("penalty weight must be >= 0");
        }
        Ok(())
    }
}

/// Capacity grid `c_min, c_min + step, ...` up to `c_max`.
fn levels(c_min: f64, c_max: f64, step: f64) -> Vec<f64> {
    let n = ((c_max - c_min) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| c_min + k as f64 * step).collect()
}

/// Open bit and capacity level per candidate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chromosome {
    pub genes: Vec<(bool, usize)>,
}

struct Codec {
    levels: Vec<Vec<f64>>,
    costs: CostModel,
}

impl Codec {
    fn new(s: &Scenario, step: f64) -> Self {
        Codec {
            levels: s
                .transfers
                .iter()
                .map(|t| levels(t.c_min, t.c_max, step))
                .collect(),
            costs: CostModel::from_scenario(s),
        }
    }

    fn decode(&self, c: &Chromosome) -> Design {
        Design {
            decisions: c
                .genes
                .iter()
                .zip(&self.levels)
                .map(|(&(open, k), lv)| TransferDecision {
                    open,
                    capacity: if open { lv[k] } else { 0.0 },
                })
                .collect(),
        }
    }

    fn cost(&self, c: &Chromosome) -> f64 {
        construction_cost(&self.costs, &self.decode(c))
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> Chromosome {
        Chromosome {
            genes: self
                .levels
                .iter()
                .map(|lv| (rng.gen_bool(0.5), rng.gen_range(0..lv.len())))
                .collect(),
        }
    }

    /// Shrink open capacities proportionally until affordable, closing the
    /// most expensive candidate when even minimum capacities are too dear.
    fn repair(&self, c: &mut Chromosome) {
        let budget = self.costs.budget * (1.0 + 1e-12);
        loop {
            let g = self.cost(c);
            if g <= budget {
                return;
            }
            let floor: f64 = c
                .genes
                .iter()
                .enumerate()
                .filter(|(_, g)| g.0)
                .map(|(n, _)| self.costs.fixed[n] + self.costs.unit[n] * self.levels[n][0])
                .sum();
            if floor > budget {
                let worst = c
                    .genes
                    .iter()
                    .enumerate()
                    .filter(|(_, g)| g.0)
                    .max_by(|(a, _), (b, _)| {
                        let ca = self.costs.fixed[*a] + self.costs.unit[*a] * self.levels[*a][0];
                        let cb = self.costs.fixed[*b] + self.costs.unit[*b] * self.levels[*b][0];
                        ca.total_cmp(&cb).then(a.cmp(b))
                    })
                    .map(|(n, _)| n)
                    .expect("an open candidate exceeds the budget");
                c.genes[worst] = (false, 0);
                continue;
            }
            let factor = (budget - floor) / (g - floor);
            let mut changed = false;
            for gene in c.genes.iter_mut() {
                if gene.0 && gene.1 > 0 {
                    let scaled = ((gene.1 as f64) * factor).floor() as usize;
                    gene.1 = scaled.min(gene.1 - 1);
                    changed = true;
                }
            }
            if !changed {
                return;
            }
        }
    }
}

/// Per-generation statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    /// Lower-level solves so far.
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct GaResult {
    pub best_design: Design,
    pub best_fitness: f64,
    pub best_cost: f64,
    pub history: Vec<GenerationStats>,
    pub evaluations: usize,
    /// Lower-level state of the best design.
    pub best_state: EquilibriumState,
}

/// Every design on the capacity grid, closed options included.
pub fn enumerate_designs(scenario: &Scenario, step: f64) -> Vec<Design> {
    let codec = Codec::new(scenario, step);
    let mut out = vec![Chromosome { genes: Vec::new() }];
    for lv in &codec.levels {
        let mut next = Vec::with_capacity(out.len() * (lv.len() + 1));
        for c in &out {
            let mut closed = c.clone();
            closed.genes.push((false, 0));
            next.push(closed);
            for k in 0..lv.len() {
                let mut open = c.clone();
                open.genes.push((true, k));
                next.push(open);
            }
        }
        out = next;
    }
    out.iter().map(|c| codec.decode(c)).collect()
}

/// Genetic search for the design that maximizes generated demand within
/// the budget. Deterministic for a given seed; fitness evaluations run in
/// parallel.
pub fn ga_solve(scenario: &Scenario, params: &GaParams, opts: &SolverOptions) -> Result<GaResult> {
    params.check()?;
    let codec = Codec::new(scenario, params.step);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut cache: HashMap<Chromosome, f64> = HashMap::new();
    let budget = codec.costs.budget;

    let score = |c: &Chromosome, cache: &HashMap<Chromosome, f64>| -> f64 {
        let trips = cache[c];
        match params.infeasible {
            InfeasiblePolicy::Repair => trips,
            InfeasiblePolicy::Penalty => {
                trips - params.penalty_weight * (codec.cost(c) - budget).max(0.0)
            }
        }
    };

    let evaluate = |pop: &[Chromosome], cache: &mut HashMap<Chromosome, f64>| -> Result<()> {
        let mut todo: Vec<Chromosome> = pop
            .iter()
            .filter(|c| !cache.contains_key(*c))
            .cloned()
            .collect();
        todo.sort();
        todo.dedup();
        let results: Vec<Result<f64>> = todo
            .par_iter()
            .map(|c| match fitness(scenario, &codec.decode(c), opts) {
                Ok(e) if e.converged => Ok(e.trips),
                Ok(_) | Err(Error::InfeasibleCapacity { .. }) => Ok(f64::NEG_INFINITY),
                Err(e) => Err(e),
            })
            .collect();
        for (c, r) in todo.into_iter().zip(results) {
            cache.insert(c, r?);
        }
        Ok(())
    };

    let mut pop = Vec::with_capacity(params.population);
    pop.push(Chromosome {
        genes: vec![(false, 0); codec.levels.len()],
    });
    while pop.len() < params.population {
        pop.push(codec.random(&mut rng));
    }
    if params.infeasible == InfeasiblePolicy::Repair {
        pop.iter_mut().for_each(|c| codec.repair(c));
    }
    evaluate(&pop, &mut cache)?;

    let mut history = Vec::with_capacity(params.generations + 1);
    let stats = |generation: usize, pop: &[Chromosome], cache: &HashMap<Chromosome, f64>| {
        let scores: Vec<f64> = pop.iter().map(|c| score(c, cache)).collect();
        GenerationStats {
            generation,
            best: scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: scores.iter().sum::<f64>() / scores.len() as f64,
            evaluations: cache.len(),
        }
    };
    history.push(stats(0, &pop, &cache));

    for generation in 1..=params.generations {
        let mut ranked: Vec<(f64, Chromosome)> =
            pop.iter().map(|c| (score(c, &cache), c.clone())).collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let mut next: Vec<Chromosome> = ranked
            .iter()
            .take(params.elitism)
            .map(|(_, c)| c.clone())
            .collect();
        let pick = |rng: &mut ChaCha8Rng| -> Chromosome {
            let mut best: Option<(f64, usize)> = None;
            for _ in 0..params.tournament {
                let i = rng.gen_range(0..pop.len());
                let s = score(&pop[i], &cache);
                if best.map_or(true, |(bs, bi)| s > bs || (s == bs && i < bi)) {
                    best = Some((s, i));
                }
            }
            pop[best.unwrap().1].clone()
        };
        while next.len() < params.population {
            let mut a = pick(&mut rng);
            let mut b = pick(&mut rng);
            if rng.gen_bool(params.crossover) {
                for i in 0..a.genes.len() {
                    if rng.gen_bool(0.5) {
                        std::mem::swap(&mut a.genes[i], &mut b.genes[i]);
                    }
                }
            }
            for child in [&mut a, &mut b] {
                for (i, gene) in child.genes.iter_mut().enumerate() {
                    if rng.gen_bool(params.mutation) {
                        gene.0 = !gene.0;
                    }
                    if rng.gen_bool(params.mutation) {
                        gene.1 = rng.gen_range(0..codec.levels[i].len());
                    }
                }
                if params.infeasible == InfeasiblePolicy::Repair {
                    codec.repair(child);
                }
            }
            next.push(a);
            if next.len() < params.population {
                next.push(b);
            }
        }
        evaluate(&next, &mut cache)?;
        pop = next;
        history.push(stats(generation, &pop, &cache));
    }

    let (best_score, best) = pop
        .iter()
        .map(|c| (score(c, &cache), c))
        .max_by(|a, b| a.0.total_cmp(&b.0).then_with(|| b.1.cmp(a.1)))
        .expect("non-empty population");
    let best_design = codec.decode(best);
    let best_state = fitness(scenario, &best_design, opts)?.state;
    Ok(GaResult {
        best_state,
        best_cost: construction_cost(&codec.costs, &best_design),
        best_design,
        best_fitness: best_score,
        evaluations: cache.len(),
        history,
    })
}
