//! Transfer-infrastructure design for multimodal networks.
//!
//! The lower level is a combined trip generation, destination, mode and
//! route logit equilibrium with capacitated park-and-ride and bike-and-ride
//! transfers. The upper level searches transfer locations and capacities
//! under a budget with a genetic algorithm.

pub mod cli;
pub mod design;
pub mod equilibrium;
mod error;
pub mod netmodel;
mod numeric;
pub mod paradoxlab;
mod table;

pub use error::{Error, Result};
