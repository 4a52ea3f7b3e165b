//! Method-of-characteristics simulation, diagnostics and the adjacency
//! oracle for compact unit-speed graphs.

pub mod diagnostics;
pub mod oracle;
pub mod profile;
pub mod solve;

pub use diagnostics::{total_mass, vertex_flux_balance};
pub use oracle::oracle_adjacency;
pub use profile::EdgeProfile;
pub use solve::{solve, Frame, SimulationSettings, TraceChannel, TraceHistory, Trajectory};
