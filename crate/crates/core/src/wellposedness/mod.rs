//! Generation criteria: R0 assembly, semigroup and group verdicts, rank
//! test, adjacency form and the discretized input-output operator.

pub mod adjacency;
pub mod boundary;
pub mod checks;
pub mod r0;
pub mod rt0;

pub use adjacency::{adjacency_form, AdjacencyForm};
pub use boundary::{BoundaryData, Kernel, KernelTable, PointMass, Side};
pub use checks::{
    check_group, check_rank_sufficient, check_semigroup, combined_group_det, group_matrices, Verdict,
    WellPosednessReport,
};
pub use r0::assemble_r0;
pub use rt0::{discretize_rt0, Rt0Result};
