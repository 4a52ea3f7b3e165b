//! Mass and vertex flux bookkeeping on sampled profiles.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::profile::EdgeProfile;
use crate::coefficients::Similarity;
use crate::error::{Error, Result};
use crate::problem::TransportProblem;

/// Sum over edges of the trapezoid integral of each profile.
pub fn total_mass(profiles: &[EdgeProfile]) -> f64 {
    profiles.iter().map(EdgeProfile::integral).sum()
}

/// Flux `q lambda q^-1 u` of a family of edges at a common coordinate.
fn flux(q: &Similarity, speeds: &[f64], u: &DVector<f64>, x: f64) -> Result<DVector<f64>> {
    let n = speeds.len();
    let qm = q.eval(x, n);
    let qinv = qm.clone().try_inverse().ok_or(Error::SingularSimilarity(x))?;
    Ok(&qm * DMatrix::from_diagonal(&DVector::from_column_slice(speeds)) * qinv * u)
}

/// Net material arriving at each vertex: sum of incoming minus outgoing
/// `c u` over the incident edge ends. Profiles must be in `edge_ids()` order.
pub fn vertex_flux_balance(problem: &TransportProblem, profiles: &[EdgeProfile]) -> Result<Vec<(String, f64)>> {
    let (ell, m) = (problem.ell(), problem.m());
    if profiles.len() != ell + m {
        return Err(Error::DimensionMismatch(format!(
            "expected {} profiles, got {}",
            ell + m,
            profiles.len()
        )));
    }
    let at = |p: &EdgeProfile, x: f64| p.eval(x);
    let ue0 = DVector::from_iterator(ell, profiles[..ell].iter().map(|p| at(p, 0.0)));
    let ui0 = DVector::from_iterator(m, profiles[ell..].iter().map(|p| at(p, 0.0)));
    let ui1 = DVector::from_iterator(m, profiles[ell..].iter().map(|p| at(p, 1.0)));
    let le: Vec<f64> = problem.external_velocities.iter().map(|v| v.value(0.0)).collect();
    let li0: Vec<f64> = problem.internal_velocities.iter().map(|v| v.value(0.0)).collect();
    let li1: Vec<f64> = problem.internal_velocities.iter().map(|v| v.value(1.0)).collect();
    // A negative velocity moves material towards increasing coordinate, so
    // the flux in that direction is -c u.
    let fe0 = -flux(&problem.q_external, &le, &ue0, 0.0)?;
    let fi0 = -flux(&problem.q_internal, &li0, &ui0, 0.0)?;
    let fi1 = -flux(&problem.q_internal, &li1, &ui1, 1.0)?;

    let mut bal: BTreeMap<&str, f64> = problem.graph.vertices.iter().map(|v| (v.as_str(), 0.0)).collect();
    for (k, e) in problem.graph.external.iter().enumerate() {
        *bal.get_mut(e.endpoint0.as_str()).unwrap() -= fe0[k];
    }
    for (j, e) in problem.graph.internal.iter().enumerate() {
        *bal.get_mut(e.endpoint1.as_str()).unwrap() += fi1[j];
        *bal.get_mut(e.endpoint0.as_str()).unwrap() -= fi0[j];
    }
    Ok(problem
        .graph
        .vertices
        .iter()
        .map(|v| (v.clone(), bal[v.as_str()]))
        .collect())
}
