//! Rewriting the vertex conditions as f(0) = B f(1).

use nalgebra::DMatrix;
use serde::Serialize;

use super::boundary::BoundaryData;
use crate::coefficients::SignStructure;
use crate::error::{Error, Result};
use crate::linalg::{self, RowMajor};

#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyForm {
    pub b: DMatrix<f64>,
    /// ||(V0e, V0i) B - V1i||_2
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdjacencySummary {
    pub b: RowMajor,
    pub residual: f64,
}

impl From<&AdjacencyForm> for AdjacencySummary {
    fn from(a: &AdjacencyForm) -> Self {
        AdjacencySummary {
            b: RowMajor::from(&a.b),
            residual: a.residual,
        }
    }
}

/// `B = V0^-1 V1` for compact graphs, `(V0e, V0i)^+ V1i` otherwise.
pub fn adjacency_form(bd: &BoundaryData, ss: &SignStructure, tol: f64) -> Result<AdjacencyForm> {
    bd.validate(ss.boundary_dim, ss.ell(), ss.m())?;
    let (v0e, v0i, v1i) = bd.endpoint_matrices();
    let q = ss.boundary_dim;
    if ss.ell() > 0 && ss.internal_signs.iter().any(|&s| s > 0) {
        return Err(Error::Precondition(
            "adjacency form on non-compact graphs needs all internal velocities negative".into(),
        ));
    }
    let mut v0 = DMatrix::zeros(q, ss.ell() + ss.m());
    v0.view_mut((0, 0), (q, ss.ell())).copy_from(&v0e);
    v0.view_mut((0, ss.ell()), (q, ss.m())).copy_from(&v0i);

    let b = if ss.ell() == 0 {
        if !linalg::is_invertible(&v0, tol) {
            return Err(Error::RankDeficient {
                rank: linalg::rank(&v0, tol),
                rows: q,
            });
        }
        v0.clone().lu().solve(&v1i).ok_or(Error::RankDeficient {
            rank: linalg::rank(&v0, tol),
            rows: q,
        })?
    } else {
        linalg::right_inverse(&v0, tol)? * &v1i
    };
    let residual = (&v0 * &b - &v1i).norm();
    Ok(AdjacencyForm { b, residual })
}
