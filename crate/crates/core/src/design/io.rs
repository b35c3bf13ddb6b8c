use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Design, GaResult, TransferDecision};
use crate::error::{Error, Result};
use crate::netmodel::Scenario;
use crate::table::{num, writer};

#[derive(Debug, Serialize, Deserialize)]
struct DecisionDoc {
    candidate: String,
    xi: f64,
    capacity: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DesignDoc {
    decisions: Vec<DecisionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fitness: Option<f64>,
}

/// Parse a design file. Candidates that are not listed stay closed.
pub fn design_from_json(scenario: &Scenario, text: &str) -> Result<Design> {
    let doc: DesignDoc = serde_json::from_str(text).map_err(|e| Error::Design(e.to_string()))?;
    let mut design = Design::closed(scenario);
    let mut seen = vec![false; scenario.transfers.len()];
    for d in doc.decisions {
        let n = scenario
            .transfer_index(&d.candidate)
            .ok_or_else(|| Error::Design(format!("unknown transfer candidate '{}'", d.candidate)))?;
        if seen[n] {
            return Err(Error::Design(format!("candidate '{}' listed twice", d.candidate)));
        }
        seen[n] = true;
        let open = if d.xi == 1.0 {
            true
        } else if d.xi == 0.0 {
            false
        } else {
            return Err(Error::Design(format!(
                "xi of '{}' must be 0 or 1, got {}",
                d.candidate, d.xi
            )));
        };
        design.decisions[n] = TransferDecision {
            open,
            capacity: d.capacity,
        };
    }
    Ok(design)
}

pub fn load_design(scenario: &Scenario, path: &Path) -> Result<Design> {
    let text = std::fs::read_to_string(path)?;
    design_from_json(scenario, &text)
}

pub fn design_to_json(
    scenario: &Scenario,
    design: &Design,
    cost: Option<f64>,
    fitness: Option<f64>,
) -> Result<String> {
    let doc = DesignDoc {
        decisions: design
            .decisions
            .iter()
            .zip(&scenario.transfers)
            .map(|(d, t)| DecisionDoc {
                candidate: t.id.clone(),
                xi: if d.open { 1.0 } else { 0.0 },
                capacity: d.capacity,
            })
            .collect(),
        cost,
        fitness,
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// `ga_history.csv`: generation, best, mean, evaluations.
pub fn write_ga_history(path: &Path, result: &GaResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["generation", "best", "mean", "evals"])?;
    for h in &result.history {
        w.write_record([
            h.generation.to_string(),
            num(h.best),
            num(h.mean),
            h.evaluations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `best_design.json` with the design's cost and fitness.
pub fn write_best_design(path: &Path, scenario: &Scenario, result: &GaResult) -> Result<()> {
    let text = design_to_json(
        scenario,
        &result.best_design,
        Some(result.best_cost),
        Some(result.best_fitness),
    )?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
