//! Simulation, exact classification and experiments for two-dimensional
//! binary freezing cellular automata.

pub mod error;
pub mod geometry;
pub mod grid;
pub mod classifier;
pub mod constructions;
pub mod engine;
pub mod percolation;
pub mod rules;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
