use std::path::Path;

use super::{ParadoxReport, ShareGrid, SweepSeries};
use crate::error::Result;
use crate::table::{flag, num, opt, writer};

/// `table1.csv`: one row per state with path flows, path costs and TTT.
pub fn write_table1(path: &Path, report: &ParadoxReport) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["state".to_string(), "ttt".to_string()];
    header.extend(report.paths.iter().map(|p| format!("flow_{p}")));
    header.extend(report.paths.iter().map(|p| format!("cost_{p}")));
    header.extend(["converged", "paradox", "delta_ttt"].map(String::from));
    w.write_record(&header)?;
    for (name, st) in [("before", &report.before), ("after", &report.after)] {
        let mut row = vec![name.to_string(), num(st.ttt)];
        row.extend(st.flows.iter().map(|&f| opt(f)));
        row.extend(st.costs.iter().map(|&c| opt(c)));
        row.push(flag(st.converged));
        row.push(flag(report.paradox));
        row.push(num(report.delta_ttt));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Sweep series in wide form, one row per parameter value.
pub fn write_sweep(path: &Path, series: &SweepSeries) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec![
        series.parameter.clone(),
        "ttt_before".into(),
        "ttt_after".into(),
        "delta_ttt".into(),
        "paradox".into(),
    ];
    header.extend(series.modes.iter().map(|m| format!("share_{m}")));
    header.extend(series.paths.iter().map(|p| format!("cost_{p}")));
    header.extend(series.transfers.iter().map(|t| format!("flow_{t}")));
    header.extend(series.transfers.iter().map(|t| format!("mu_{t}")));
    header.extend(["generated", "converged"].map(String::from));
    w.write_record(&header)?;
    for p in &series.points {
        let mut row = vec![
            num(p.value),
            num(p.ttt_before),
            num(p.ttt_after),
            num(p.delta_ttt()),
            flag(p.paradox()),
        ];
        row.extend(p.shares.iter().map(|&s| num(s)));
        row.extend(p.path_costs.iter().map(|&c| opt(c)));
        row.extend(p.transfer_flows.iter().map(|&f| num(f)));
        row.extend(p.mu.iter().map(|&m| num(m)));
        row.push(num(p.generated));
        row.push(flag(p.converged));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `fig6.csv` in long form: bike_cap, car_cap, share, feasible, fitness.
pub fn write_fig6(path: &Path, grid: &ShareGrid) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["bike_cap", "car_cap", "share", "feasible", "fitness"])?;
    for (i, &b) in grid.bike_caps.iter().enumerate() {
        for (j, &c) in grid.car_caps.iter().enumerate() {
            w.write_record([
                num(b),
                num(c),
                num(grid.share[i][j]),
                flag(grid.feasible[i][j]),
                num(grid.fitness[i][j]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
