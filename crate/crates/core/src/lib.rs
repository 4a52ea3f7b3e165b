//! Well-posedness criteria and characteristic simulation for linear
//! transport systems on metric graphs.

pub mod catalog;
pub mod cli;
pub mod coefficients;
pub mod config;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod problem;
pub mod simulator;
pub mod spectral;
pub mod wellposedness;

pub use error::{Error, Result};
pub use problem::TransportProblem;
