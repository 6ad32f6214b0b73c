//! Lieb-Robinson bounds for two-family lattice Hamiltonians whose terms may
//! be unbounded but whose commutators are not, checked against exact
//! Heisenberg dynamics on small systems.

pub mod bounds;
pub mod chains;
pub mod cli;
pub mod config;
pub mod constants;
pub mod derivative;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod model;
pub mod operator;
pub mod report;

pub use error::{Error, Result};
