//! Fit route dispersion and the P+R transfer time to observed before-state
//! flows, then find the transfer time at which opening P+R leaves TTT unchanged.

use transfernet::design::Design;
use transfernet::netmodel::load_scenario;
use transfernet::paradoxlab::{calibrate, paradox_threshold_time, FreeParam, ParamRange, Targets};

fn main() -> transfernet::Result<()> {
    let s = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/fig2.json"))?;
    let targets = Targets {
        flows: vec![("1".into(), 755.0), ("2".into(), 1245.0)],
        ttt: Some(102_790.0),
    };
    let free = [
        ParamRange { param: FreeParam::Theta, lo: 0.05, hi: 2.0 },
        ParamRange { param: FreeParam::TransferTime(0), lo: 0.0, hi: 20.0 },
    ];
    let fit = calibrate(&s, &Design::closed(&s), &targets, &free, &s.solver)?;
    println!(
        "theta {:.4}, transfer time {:.3}, residual {:.3e}{}",
        fit.values[0],
        fit.values[1],
        fit.residual,
        if fit.poor { " (poor fit)" } else { "" }
    );

    let tau = paradox_threshold_time(&s, 0, 2000.0, 0.0, 20.0, &s.solver)?;
    println!("opening P+R leaves TTT unchanged at transfer time {tau:.4} min");
    Ok(())
}
