//! A complete transport problem: graph, velocities, similarity and boundary data.

use nalgebra::DMatrix;

use crate::coefficients::projections::{projections, SignStructure};
use crate::coefficients::similarity::Similarity;
use crate::coefficients::velocity::{FieldKind, VelocityField};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::wellposedness::boundary::BoundaryData;

/// Sample count used by the strict-sign check.
pub const SIGN_SAMPLES: usize = 257;

#[derive(Debug, Clone)]
pub struct TransportProblem {
    pub graph: MetricGraph,
    pub external_velocities: Vec<VelocityField>,
    pub internal_velocities: Vec<VelocityField>,
    pub q_external: Similarity,
    pub q_internal: Similarity,
    pub boundary: BoundaryData,
    pub p: f64,
    external_signs: Vec<i8>,
    internal_signs: Vec<i8>,
}

impl TransportProblem {
    pub fn new(
        graph: MetricGraph,
        external_velocities: Vec<VelocityField>,
        internal_velocities: Vec<VelocityField>,
        q_external: Similarity,
        q_internal: Similarity,
        boundary: BoundaryData,
        p: f64,
    ) -> Result<Self> {
        if external_velocities.len() != graph.ell() || internal_velocities.len() != graph.m() {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} external and {} internal edges but {} and {} velocity fields were given",
                graph.ell(),
                graph.m(),
                external_velocities.len(),
                internal_velocities.len()
            )));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("exponent p must lie in [1, inf), got {p}")));
        }
        let mut external_signs = Vec::with_capacity(graph.ell());
        for (v, e) in external_velocities.iter().zip(&graph.external) {
            if v.kind != FieldKind::External {
                return Err(Error::Config(format!("edge `{}` needs an external field", e.id)));
            }
            external_signs.push(v.validate_sign(SIGN_SAMPLES).map_err(|err| err.with_edge(&e.id))?);
        }
        let mut internal_signs = Vec::with_capacity(graph.m());
        for (v, e) in internal_velocities.iter().zip(&graph.internal) {
            if v.kind != FieldKind::Internal {
                return Err(Error::Config(format!("edge `{}` needs an internal field", e.id)));
            }
            internal_signs.push(v.validate_sign(SIGN_SAMPLES).map_err(|err| err.with_edge(&e.id))?);
        }
        let grid: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
        q_external.validate(graph.ell(), &[0.0])?;
        q_internal.validate(graph.m(), &grid)?;
        let ss = projections(&external_signs, &internal_signs);
        boundary.validate(ss.boundary_dim, graph.ell(), graph.m())?;
        Ok(TransportProblem {
            graph,
            external_velocities,
            internal_velocities,
            q_external,
            q_internal,
            boundary,
            p,
            external_signs,
            internal_signs,
        })
    }

    pub fn ell(&self) -> usize {
        self.graph.ell()
    }

    pub fn m(&self) -> usize {
        self.graph.m()
    }

    pub fn external_signs(&self) -> &[i8] {
        &self.external_signs
    }

    pub fn internal_signs(&self) -> &[i8] {
        &self.internal_signs
    }

    /// Signs in `edge_ids()` order.
    pub fn edge_signs(&self) -> Vec<i8> {
        self.external_signs.iter().chain(&self.internal_signs).copied().collect()
    }

    pub fn sign_structure(&self) -> SignStructure {
        projections(&self.external_signs, &self.internal_signs)
    }

    /// Corner similarity matrices `(qe(0), qi(0), qi(1))`.
    pub fn corners(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        (
            self.q_external.eval(0.0, self.ell()),
            self.q_internal.eval(0.0, self.m()),
            self.q_internal.eval(1.0, self.m()),
        )
    }

    /// Same problem with a different boundary operator.
    pub fn with_boundary(&self, boundary: BoundaryData) -> Result<Self> {
        boundary.validate(self.sign_structure().boundary_dim, self.ell(), self.m())?;
        Ok(TransportProblem {
            boundary,
            ..self.clone()
        })
    }
}
