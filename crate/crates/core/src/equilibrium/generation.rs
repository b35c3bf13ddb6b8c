//! New-demand generation at fixed composite costs.
//!
//! Minimizes `Σ C_rs q_rs + (1/η) Σ q_rs ln(q_rs / o_r) - Σ_s H_s(d_s)`
//! subject to `o_r <= O_r` and `d_s <= D_s`, where `H_s` is the integral of
//! the linear inverse demand `h_s(d) = a_s - b_s d`.

use crate::numeric::{brent, log_sum_exp};

#[derive(Debug, Clone, Copy)]
pub(crate) struct GenBlock {
    pub origin: usize,
    pub destination: usize,
    /// Composite cost; blocks with no usable path carry `+inf`.
    pub cost: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GenDestination {
    pub room: f64,
    pub a: f64,
    pub b: f64,
}

impl GenDestination {
    pub fn h(&self, d: f64) -> f64 {
        self.a - self.b * d
    }
}

pub(crate) struct Generation<'p> {
    pub blocks: &'p [GenBlock],
    pub origin_room: &'p [f64],
    pub destinations: &'p [GenDestination],
    pub eta: f64,
}

impl Generation<'_> {
    pub fn solve(&self, warm: Option<&[f64]>) -> Vec<f64> {
        let n_orig = self.origin_room.len();
        let mut per_origin: Vec<Vec<usize>> = vec![Vec::new(); n_orig];
        for (i, b) in self.blocks.iter().enumerate() {
            if b.cost.is_finite() && self.origin_room[b.origin] > 0.0 {
                per_origin[b.origin].push(i);
            }
        }
        let mut q = vec![0.0; self.blocks.len()];
        if per_origin.iter().all(|v| v.len() <= 1) {
            self.water_fill(&per_origin, &mut q);
            return q;
        }
        if let Some(w) = warm {
            for (i, v) in w.iter().enumerate() {
                if self.blocks[i].cost.is_finite() {
                    q[i] = *v;
                }
            }
        }
        let scale = 1.0 + self.origin_room.iter().copied().fold(0.0, f64::max);
        let mut inflow = vec![0.0; self.destinations.len()];
        for _sweep in 0..1000 {
            inflow.iter_mut().for_each(|x| *x = 0.0);
            for (i, b) in self.blocks.iter().enumerate() {
                inflow[b.destination] += q[i];
            }
            let mut change: f64 = 0.0;
            for (r, ids) in per_origin.iter().enumerate() {
                if ids.is_empty() {
                    continue;
                }
                let terms: Vec<Term> = ids
                    .iter()
                    .map(|&i| {
                        let s = self.blocks[i].destination;
                        let dest = &self.destinations[s];
                        let others = inflow[s] - q[i];
                        Term {
                            kappa: self.blocks[i].cost - dest.a + dest.b * others,
                            b: dest.b,
                            cap: (dest.room - others).max(0.0),
                        }
                    })
                    .collect();
                let sol = solve_origin(&terms, self.origin_room[r], self.eta);
                for (k, &i) in ids.iter().enumerate() {
                    let s = self.blocks[i].destination;
                    change = change.max((sol[k] - q[i]).abs());
                    inflow[s] += sol[k] - q[i];
                    q[i] = sol[k];
                }
            }
            if change <= 1e-13 * scale {
                break;
            }
        }
        q
    }

    /// Exact solution when every origin serves at most one destination:
    /// fill the cheapest origins of each destination first.
    fn water_fill(&self, per_origin: &[Vec<usize>], q: &mut [f64]) {
        let mut by_dest: Vec<Vec<usize>> = vec![Vec::new(); self.destinations.len()];
        for ids in per_origin {
            if let Some(&i) = ids.first() {
                by_dest[self.blocks[i].destination].push(i);
            }
        }
        for (s, ids) in by_dest.iter_mut().enumerate() {
            let dest = &self.destinations[s];
            ids.sort_by(|&x, &y| {
                self.blocks[x]
                    .cost
                    .total_cmp(&self.blocks[y].cost)
                    .then(x.cmp(&y))
            });
            let mut d = 0.0;
            for &i in ids.iter() {
                let c = self.blocks[i].cost;
                let target = if dest.b > 0.0 {
                    (dest.a - c) / dest.b
                } else if c < dest.a {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                };
                let room = self.origin_room[self.blocks[i].origin];
                let want = (target - d).clamp(0.0, room);
                let take = want.min((dest.room - d).max(0.0));
                q[i] = take;
                d += take;
                if take < room {
                    break;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    /// `C_rs - a_s + b_s e_s` with `e_s` the inflow from other origins.
    kappa: f64,
    b: f64,
    cap: f64,
}

/// Flow to one destination at origin total `o` and origin price `w`.
fn flow_at(t: &Term, o: f64, w: f64, eta: f64) -> f64 {
    if t.cap <= 0.0 {
        return 0.0;
    }
    let r = w - t.kappa;
    let ln_o = o.ln();
    let mut u = (ln_o + eta * r).min(700.0);
    if t.b > 0.0 {
        for _ in 0..200 {
            let eu = u.exp();
            let f = (u - ln_o) / eta + t.b * eu - r;
            let step = f / (1.0 / eta + t.b * eu);
            u -= step;
            if step.abs() <= 1e-15 * (1.0 + u.abs()) {
                break;
            }
        }
    }
    u.exp().min(t.cap)
}

/// Origin price `W` that splits total `o` across destinations.
fn price_for(terms: &[Term], o: f64, eta: f64) -> f64 {
    let w0 = -log_sum_exp(
        terms
            .iter()
            .filter(|t| t.cap > 0.0)
            .map(|t| -eta * t.kappa),
    ) / eta;
    let g = |w: f64| terms.iter().map(|t| flow_at(t, o, w, eta)).sum::<f64>() - o;
    let g_lo = g(w0);
    if g_lo >= 0.0 {
        return w0;
    }
    let bmax = terms.iter().map(|t| t.b).fold(0.0, f64::max);
    let mut step = bmax * o + 1e-9 * (1.0 + w0.abs());
    let mut hi = w0 + step;
    let mut g_hi = g(hi);
    let mut lo = w0;
    let mut g_l = g_lo;
    while g_hi < 0.0 {
        lo = hi;
        g_l = g_hi;
        step *= 2.0;
        hi += step;
        g_hi = g(hi);
        if !hi.is_finite() {
            return hi;
        }
    }
    brent(g, lo, hi, g_l, g_hi, 1e-14 * (1.0 + hi.abs()), 300)
}

/// Exact solve of one origin's generation and destination split.
fn solve_origin(terms: &[Term], room: f64, eta: f64) -> Vec<f64> {
    let mut zero = vec![0.0; terms.len()];
    let usable: f64 = terms.iter().map(|t| t.cap).sum();
    if room <= 0.0 || usable <= 0.0 {
        return zero;
    }
    let w0 = -log_sum_exp(
        terms
            .iter()
            .filter(|t| t.cap > 0.0)
            .map(|t| -eta * t.kappa),
    ) / eta;
    if w0 >= 0.0 {
        return zero;
    }
    let split = |o: f64| -> Vec<f64> {
        let w = price_for(terms, o, eta);
        terms.iter().map(|t| flow_at(t, o, w, eta)).collect()
    };
    let o_hi = room.min(usable);
    let w_hi = if o_hi < usable {
        price_for(terms, o_hi, eta)
    } else {
        // Every destination full: the price is the largest marginal cost.
        terms
            .iter()
            .filter(|t| t.cap > 0.0)
            .map(|t| (t.cap / o_hi).ln() / eta + t.kappa + t.b * t.cap)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    if w_hi <= 0.0 {
        return if o_hi < usable {
            split(o_hi)
        } else {
            terms.iter().map(|t| t.cap).collect()
        };
    }
    let f = |o: f64| price_for(terms, o, eta);
    let lo = 0.0;
    let o = brent(f, lo, o_hi, w0, w_hi, 1e-13 * (1.0 + o_hi), 300);
    if o <= 0.0 {
        return std::mem::take(&mut zero);
    }
    split(o)
}
