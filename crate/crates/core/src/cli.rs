//! Command-line front end: `validate`, `solve`, `design`, `sweep` and
//! `experiment`. Every subcommand writes its CSV outputs and a
//! `run_meta.json` into `--out`.
//!
//! Exit codes: 0 success, 1 invalid input, 2 solver non-convergence,
//! 3 usage error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::design::{
    check_feasible, construction_cost, ga_solve, load_design, write_best_design, write_ga_history,
    CostModel, Design, GaParams, InfeasiblePolicy,
};
use crate::equilibrium::{kkt_check, solve_lower_level, write_bundle, StepRule};
use crate::error::{Error, Result};
use crate::netmodel::{apply_design, load_scenario, Scenario};
use crate::paradoxlab::{
    before_after, calibrate, grid, share_sweep, sweep_capacity, sweep_theta, transit_share_grid,
    write_fig6, write_sweep, write_table1, FreeParam, ParamRange, SweepSeries, Targets,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "transfernet", version, about = "Transfer-infrastructure design on multimodal networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a scenario and print its size.
    Validate {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the lower level for one design (default: all candidates open at c_max).
    Solve {
        scenario: PathBuf,
        #[arg(long)]
        design: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Genetic search for the best budget-feasible design.
    Design {
        scenario: PathBuf,
        #[command(flatten)]
        ga: GaFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the dispersion parameter or one candidate's capacity.
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        step: f64,
        /// Candidate id for capacity sweeps (default: the first).
        #[arg(long)]
        candidate: Option<String>,
        /// After-state design for theta sweeps (default: all open at c_max).
        #[arg(long)]
        design: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Reproduce one of the paradox experiments.
    Experiment {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        name: ExperimentName,
        /// Override the experiment's default grid.
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[command(flatten)]
        ga: GaFlags,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepParam {
    Theta,
    Capacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentName {
    Table1,
    Fig3a,
    Fig3b,
    Fig4,
    Fig6,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StepArg {
    Msa,
    Armijo,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InfeasibleArg {
    Repair,
    Penalty,
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_inner: Option<usize>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long, value_enum)]
    step_rule: Option<StepArg>,
}

#[derive(Debug, Args)]
struct GaFlags {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    crossover: Option<f64>,
    #[arg(long)]
    mutation: Option<f64>,
    #[arg(long)]
    tournament: Option<usize>,
    #[arg(long)]
    elitism: Option<usize>,
    /// Capacity discretization step.
    #[arg(long)]
    capacity_step: Option<f64>,
    #[arg(long, value_enum)]
    infeasible: Option<InfeasibleArg>,
    #[arg(long)]
    penalty_weight: Option<f64>,
}

impl GaFlags {
    fn params(&self) -> GaParams {
        let d = GaParams::default();
        GaParams {
            population: self.population.unwrap_or(d.population),
            generations: self.generations.unwrap_or(d.generations),
            crossover: self.crossover.unwrap_or(d.crossover),
            mutation: self.mutation.unwrap_or(d.mutation),
            tournament: self.tournament.unwrap_or(d.tournament),
            elitism: self.elitism.unwrap_or(d.elitism),
            step: self.capacity_step.unwrap_or(d.step),
            seed: self.seed,
            infeasible: match self.infeasible {
                Some(InfeasibleArg::Penalty) => InfeasiblePolicy::Penalty,
                Some(InfeasibleArg::Repair) => InfeasiblePolicy::Repair,
                None => d.infeasible,
            },
            penalty_weight: self.penalty_weight.unwrap_or(d.penalty_weight),
        }
    }
}

/// Parse `argv` (program name first), run the subcommand and return the
/// process exit code. Errors go to stderr as one `error[kind]: message` line.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("bad arguments");
            eprintln!("error[usage]: {}", first.trim_start_matches("error: "));
            return EXIT_USAGE;
        }
    };
    let threads = std::env::var("TRANSFERNET_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error[usage]: cannot start worker pool: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("error[convergence]: lower-level solver did not converge");
            EXIT_NOT_CONVERGED
        }
        Err(e) => {
            let (kind, code) = match e {
                Error::Argument(_) => ("usage", EXIT_USAGE),
                Error::Parse(_) | Error::Validation(_) => ("validation", EXIT_INVALID),
                Error::Design(_) => ("design", EXIT_INVALID),
                Error::NoActivePath { .. } | Error::InfeasibleCapacity { .. } => {
                    ("infeasible", EXIT_INVALID)
                }
                Error::Io(_) | Error::Csv(_) | Error::Json(_) => ("io", EXIT_INVALID),
            };
            eprintln!("error[{kind}]: {}", e.to_string().replace('\n', " "));
            code
        }
    }
}

/// Scenario with command-line overrides applied and re-validated.
fn load(path: &Path, c: &Common) -> Result<Scenario> {
    let mut s = load_scenario(path)?;
    if let Some(v) = c.theta {
        s.behavior.theta = v;
    }
    if c.gamma.is_some() {
        s.behavior.gamma = c.gamma;
    }
    if c.eta.is_some() {
        s.behavior.eta = c.eta;
    }
    if let Some(v) = c.budget {
        s.budget = v;
    }
    if let Some(v) = c.tolerance {
        s.solver.tolerance = v;
    }
    if let Some(v) = c.max_inner {
        s.solver.max_inner = v;
    }
    if let Some(v) = c.max_outer {
        s.solver.max_outer = v;
    }
    if let Some(r) = c.step_rule {
        s.solver.step_rule = match r {
            StepArg::Msa => StepRule::Msa,
            StepArg::Armijo => StepRule::Armijo,
        };
    }
    s.validate()?;
    Ok(s)
}

fn candidate(s: &Scenario, id: Option<&str>) -> Result<usize> {
    match id {
        Some(id) => s
            .transfer_index(id)
            .ok_or_else(|| Error::Argument(format!("unknown transfer candidate '{id}'"))),
        None if s.transfers.is_empty() => {
            Err(Error::Argument("scenario has no transfer candidates".into()))
        }
        None => Ok(0),
    }
}

struct Meta {
    command: &'static str,
    scenario: PathBuf,
    start: Instant,
    extra: serde_json::Map<String, Value>,
}

impl Meta {
    fn new(command: &'static str, scenario: &Path) -> Self {
        Meta {
            command,
            scenario: scenario.to_path_buf(),
            start: Instant::now(),
            extra: serde_json::Map::new(),
        }
    }

    fn set(&mut self, key: &str, v: Value) {
        self.extra.insert(key.to_string(), v);
    }

    fn write(self, out: &Path, s: &Scenario, seed: Option<u64>) -> Result<()> {
        std::fs::create_dir_all(out)?;
        let mut doc = json!({
            "command": self.command,
            "scenario": self.scenario.display().to_string(),
            "version": env!("CARGO_PKG_VERSION"),
            "seed": seed,
            "threads": rayon::current_num_threads(),
            "behavior": {
                "theta": s.behavior.theta,
                "gamma": s.behavior.gamma(),
                "eta": s.behavior.eta(),
            },
            "budget": s.budget,
            "policy": s.policy,
            "k_paths": s.k_paths,
            "solver": s.solver,
            "wall_time_s": self.start.elapsed().as_secs_f64(),
        });
        let obj = doc.as_object_mut().expect("object");
        for (k, v) in self.extra {
            obj.insert(k, v);
        }
        std::fs::write(out.join("run_meta.json"), serde_json::to_string_pretty(&doc)? + "\n")?;
        Ok(())
    }
}

fn series_converged(s: &SweepSeries) -> bool {
    s.points.iter().all(|p| p.converged)
}

fn series_summary(s: &SweepSeries) -> Value {
    json!({
        "points": s.points.len(),
        "crossover": s.crossover(),
        "paradox_regions": s.paradox_regions(),
        "minimizer": s.minimizer(),
    })
}

/// Runs the command; `Ok(false)` means outputs were written but some solve
/// did not converge.
fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Validate { scenario, common } => {
            let mut meta = Meta::new("validate", &scenario);
            let s = load(&scenario, &common)?;
            let net = apply_design(&s, &Design::all_open(&s))?;
            println!(
                "ok: {} nodes, {} links, {} modes, {} transfer candidates, {} OD pairs, {} paths",
                s.nodes.len(),
                s.links.len(),
                s.modes.len(),
                s.transfers.len(),
                s.demand.od.len(),
                net.paths.len()
            );
            meta.set(
                "counts",
                json!({
                    "nodes": s.nodes.len(),
                    "links": s.links.len(),
                    "modes": s.modes.len(),
                    "transfers": s.transfers.len(),
                    "od": s.demand.od.len(),
                    "paths": net.paths.len(),
                }),
            );
            meta.write(&common.out, &s, None)?;
            Ok(true)
        }
        Command::Solve {
            scenario,
            design,
            common,
        } => {
            let mut meta = Meta::new("solve", &scenario);
            let s = load(&scenario, &common)?;
            let d = match &design {
                Some(p) => load_design(&s, p)?,
                None => Design::all_open(&s),
            };
            let net = apply_design(&s, &d)?;
            let st = solve_lower_level(&net, &s.behavior, &s.solver)?;
            write_bundle(&net, &st, &common.out)?;
            let kkt = kkt_check(&net, &s.behavior, &st);
            println!(
                "Z {} TTT {} generated {} iterations {} converged {}",
                st.objective.total(),
                st.ttt,
                st.generated(),
                st.iterations,
                st.converged
            );
            meta.set("design", json!(d));
            meta.set(
                "construction_cost",
                json!(construction_cost(&CostModel::from_scenario(&s), &d)),
            );
            meta.set(
                "results",
                json!({
                    "objective": st.objective.total(),
                    "ttt": st.ttt,
                    "generated": st.generated(),
                    "gap": st.gap,
                    "iterations": st.iterations,
                    "outer_iterations": st.outer_iterations,
                    "converged": st.converged,
                    "kkt_max": kkt.max(),
                }),
            );
            meta.write(&common.out, &s, None)?;
            Ok(st.converged)
        }
        Command::Design {
            scenario,
            ga,
            common,
        } => {
            let mut meta = Meta::new("design", &scenario);
            let s = load(&scenario, &common)?;
            let params = ga.params();
            let res = ga_solve(&s, &params, &s.solver)?;
            write_ga_history(&common.out.join("ga_history.csv"), &res)?;
            write_best_design(&common.out.join("best_design.json"), &s, &res)?;
            println!(
                "best fitness {} cost {} after {} evaluations",
                res.best_fitness, res.best_cost, res.evaluations
            );
            meta.set("ga", json!(params));
            meta.set(
                "results",
                json!({
                    "best_design": res.best_design,
                    "best_fitness": res.best_fitness,
                    "best_cost": res.best_cost,
                    "evaluations": res.evaluations,
                }),
            );
            meta.write(&common.out, &s, Some(params.seed))?;
            Ok(res.best_fitness.is_finite())
        }
        Command::Sweep {
            scenario,
            param,
            from,
            to,
            step,
            candidate: cand,
            design,
            common,
        } => {
            let mut meta = Meta::new("sweep", &scenario);
            let s = load(&scenario, &common)?;
            let values = grid(from, to, step)?;
            let (series, file) = match param {
                SweepParam::Theta => {
                    let d = match &design {
                        Some(p) => load_design(&s, p)?,
                        None => Design::all_open(&s),
                    };
                    (sweep_theta(&s, &d, &values, &s.solver)?, "fig3a.csv")
                }
                SweepParam::Capacity => {
                    let n = candidate(&s, cand.as_deref())?;
                    meta.set("candidate", json!(s.transfers[n].id));
                    (
                        sweep_capacity(&s, n, &values, s.behavior.theta, &s.solver)?,
                        "fig3b.csv",
                    )
                }
            };
            write_sweep(&common.out.join(file), &series)?;
            meta.set("sweep", json!({"param": series.parameter, "from": from, "to": to, "step": step}));
            meta.set("results", series_summary(&series));
            meta.write(&common.out, &s, None)?;
            Ok(series_converged(&series))
        }
        Command::Experiment {
            scenario,
            name,
            from,
            to,
            step,
            ga,
            common,
        } => {
            let mut meta = Meta::new("experiment", &scenario);
            let s = load(&scenario, &common)?;
            let pick = |f: f64, t: f64, st: f64| grid(from.unwrap_or(f), to.unwrap_or(t), step.unwrap_or(st));
            meta.set("experiment", json!(format!("{name:?}").to_lowercase()));
            let out = &common.out;
            let (ok, seed) = match name {
                ExperimentName::Table1 => (table1(&s, out, &mut meta)?, None),
                ExperimentName::Fig3a => {
                    let series = sweep_theta(&s, &Design::all_open(&s), &pick(0.1, 0.9, 0.01)?, &s.solver)?;
                    write_sweep(&out.join("fig3a.csv"), &series)?;
                    meta.set("results", series_summary(&series));
                    (series_converged(&series), None)
                }
                ExperimentName::Fig3b => {
                    let n = candidate(&s, None)?;
                    let series = sweep_capacity(&s, n, &pick(100.0, 2000.0, 5.0)?, s.behavior.theta, &s.solver)?;
                    write_sweep(&out.join("fig3b.csv"), &series)?;
                    meta.set("results", series_summary(&series));
                    (series_converged(&series), None)
                }
                ExperimentName::Fig4 => {
                    let n = candidate(&s, None)?;
                    let series = share_sweep(&s, n, &pick(100.0, 2000.0, 10.0)?, &s.behavior, &s.solver)?;
                    write_sweep(&out.join("fig4.csv"), &series)?;
                    meta.set("results", series_summary(&series));
                    (series_converged(&series), None)
                }
                ExperimentName::Fig6 => {
                    let params = ga.params();
                    (fig6(&s, out, &params, step, &mut meta)?, Some(params.seed))
                }
            };
            meta.write(out, &s, seed)?;
            Ok(ok)
        }
    }
}

const TABLE1_BEFORE: [(&str, f64); 2] = [("1", 755.0), ("2", 1245.0)];
const TABLE1_BEFORE_TTT: f64 = 102_790.0;

/// Calibrate `θ` and the first candidate's transfer time to the before
/// row, then compare the all-closed and all-open states.
fn table1(s: &Scenario, out: &Path, meta: &mut Meta) -> Result<bool> {
    let targets = Targets {
        flows: TABLE1_BEFORE
            .iter()
            .map(|(p, f)| (p.to_string(), *f))
            .collect(),
        ttt: Some(TABLE1_BEFORE_TTT),
    };
    let mut free = vec![ParamRange {
        param: FreeParam::Theta,
        lo: 0.05,
        hi: 2.0,
    }];
    if !s.transfers.is_empty() {
        free.push(ParamRange {
            param: FreeParam::TransferTime(0),
            lo: 0.0,
            hi: 20.0,
        });
    }
    let cal = calibrate(s, &Design::closed(s), &targets, &free, &s.solver)?;
    if cal.poor {
        eprintln!(
            "warning: before-row calibration is poor (residual {:.4e}); the after row is a prediction at the fitted values",
            cal.residual
        );
    }
    let cs = &cal.scenario;
    let report = before_after(cs, &Design::all_open(cs), &cs.behavior, &cs.solver)?;
    write_table1(&out.join("table1.csv"), &report)?;
    meta.set(
        "calibration",
        json!({
            "free": free.iter().map(|r| format!("{:?}", r.param)).collect::<Vec<_>>(),
            "values": cal.values,
            "residual": cal.residual,
            "poor": cal.poor,
            "evaluations": cal.evaluations,
            "targets": {"flows": TABLE1_BEFORE, "ttt": TABLE1_BEFORE_TTT},
        }),
    );
    meta.set(
        "results",
        json!({
            "ttt_before": report.before.ttt,
            "ttt_after": report.after.ttt,
            "delta_ttt": report.delta_ttt,
            "paradox": report.paradox,
        }),
    );
    Ok(report.before.converged && report.after.converged)
}

/// Transit-share grid over the first two candidates plus a GA run.
fn fig6(s: &Scenario, out: &Path, params: &GaParams, step: Option<f64>, meta: &mut Meta) -> Result<bool> {
    if s.transfers.len() < 2 {
        return Err(Error::Argument("fig6 needs two transfer candidates".into()));
    }
    let step = step.unwrap_or(params.step);
    let (b, c) = (&s.transfers[0], &s.transfers[1]);
    let bike = grid(b.c_min, b.c_max, step)?;
    let car = grid(c.c_min, c.c_max, step)?;
    let g = transit_share_grid(s, 0, 1, &bike, &car, &s.solver)?;
    write_fig6(&out.join("fig6.csv"), &g)?;
    let res = ga_solve(s, params, &s.solver)?;
    write_ga_history(&out.join("ga_history.csv"), &res)?;
    write_best_design(&out.join("best_design.json"), s, &res)?;
    let feasible_best = check_feasible(s, &res.best_design).feasible();
    let last = g.share.last().and_then(|r| r.last()).copied();
    meta.set("ga", json!(params));
    meta.set(
        "results",
        json!({
            "grid_step": step,
            "share_at_max_capacity": last,
            "grid_best_fitness": g.best_fitness(),
            "optimum_set": g.optimum_set(1e-6),
            "ga_best_design": res.best_design,
            "ga_best_fitness": res.best_fitness,
            "ga_best_cost": res.best_cost,
            "ga_best_feasible": feasible_best,
            "ga_evaluations": res.evaluations,
        }),
    );
    let all = g.converged.iter().flatten().all(|&c| c);
    Ok(all && res.best_fitness.is_finite())
}
