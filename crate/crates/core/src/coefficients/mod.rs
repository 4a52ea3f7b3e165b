//! Velocity fields, similarity matrices, sign projections and the
//! normalization maps.

pub mod normalization;
pub mod projections;
pub mod quadrature;
pub mod similarity;
pub mod velocity;

pub use normalization::{invert_phi, normalize, EdgeRef, NormalizationMaps, NormalizedProblem};
pub use projections::{projections, SignStructure};
pub use similarity::Similarity;
pub use velocity::{FieldKind, Profile, VelocityField};
