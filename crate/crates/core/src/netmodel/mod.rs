//! Supernetwork: scenario loading and validation, transfer candidates,
//! path sets and design application.

mod active;
mod cost;
mod paths;
mod scenario;

pub use active::{apply_design, ActiveNetwork, ModeBlock, OdBlock};
pub use cost::LinkCostFn;
pub use paths::{enumerate_paths, free_flow_cost};
pub use scenario::{
    load_scenario, parse_scenario, BehaviorParams, DemandPolicy, DemandSpec, DestinationSpec,
    Link, Mode, ModeKind, OdDemand, OriginSpec, Path, Scenario, Step, TransferCandidate,
    AUTO_SUBNETWORKS,
};
