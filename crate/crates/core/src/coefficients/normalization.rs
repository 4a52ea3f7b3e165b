//! Reparametrizations phi_k, phibar_j, cbar_j and the constant-speed
//! equivalent of a problem.

use nalgebra::DMatrix;
use serde::Serialize;

use super::velocity::{interp, VelocityField};
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::TransportProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRef {
    External(usize),
    Internal(usize),
}

#[derive(Debug, Clone)]
pub struct NormalizationMaps {
    pub external: Vec<VelocityField>,
    pub internal: Vec<VelocityField>,
    /// phi_j(1), signed
    pub phi_one: Vec<f64>,
    pub cbar: Vec<f64>,
}

impl NormalizationMaps {
    pub fn build(external: &[VelocityField], internal: &[VelocityField]) -> Result<Self> {
        let phi_one = internal.iter().map(|v| v.phi(1.0)).collect::<Result<Vec<_>>>()?;
        let cbar = phi_one.iter().map(|p| 1.0 / p).collect();
        Ok(NormalizationMaps {
            external: external.to_vec(),
            internal: internal.to_vec(),
            phi_one,
            cbar,
        })
    }

    pub fn from_problem(p: &TransportProblem) -> Result<Self> {
        Self::build(&p.external_velocities, &p.internal_velocities)
    }

    pub fn phi(&self, k: usize, r: f64) -> Result<f64> {
        self.external[k].phi(r)
    }

    /// Normalized internal coordinate; exactly 0 and 1 at the ends.
    pub fn phibar(&self, j: usize, s: f64) -> Result<f64> {
        if s == 1.0 {
            return Ok(1.0);
        }
        Ok(self.cbar[j] * self.internal[j].phi(s)?)
    }

    /// max_j |cbar_j|, zero for compact-free problems.
    pub fn cbar_sup(&self) -> f64 {
        self.cbar.iter().fold(0.0, |a, c| a.max(c.abs()))
    }

    pub fn cbar_min(&self) -> f64 {
        self.cbar.iter().fold(f64::INFINITY, |a, c| a.min(c.abs()))
    }
}

/// Solve `phi(x) = y` on the given edge (`phibar` for internal edges).
pub fn invert_phi(maps: &NormalizationMaps, edge: EdgeRef, y: f64) -> Result<f64> {
    match edge {
        EdgeRef::External(k) => maps.external[k].invert_phi(y),
        EdgeRef::Internal(j) => {
            if !(0.0..=1.0).contains(&y) {
                return Err(Error::OutOfRange { value: y, lo: 0.0, hi: 1.0 });
            }
            if y == 1.0 {
                return Ok(1.0);
            }
            let target = (y * maps.phi_one[j]).clamp(maps.phi_one[j].min(0.0), maps.phi_one[j].max(0.0));
            maps.internal[j].invert_phi(target)
        }
    }
}

/// Constant-speed equivalent: external speeds +-1, internal speeds cbar_j,
/// corner similarity matrices absorbed into the boundary matrices.
#[derive(Debug, Clone)]
pub struct NormalizedProblem {
    pub maps: NormalizationMaps,
    pub edge_ids: Vec<String>,
    pub external_signs: Vec<i8>,
    pub internal_signs: Vec<i8>,
    pub v0e: DMatrix<f64>,
    pub v0i: DMatrix<f64>,
    pub v1i: DMatrix<f64>,
    pub q_external: DMatrix<f64>,
    pub q_internal: DMatrix<f64>,
    pub q_external_inv: DMatrix<f64>,
    pub q_internal_inv: DMatrix<f64>,
    /// Kernel or interior point masses present in the original problem.
    pub nonlocal: bool,
}

pub fn normalize(problem: &TransportProblem) -> Result<NormalizedProblem> {
    if !problem.q_external.is_constant() || !problem.q_internal.is_constant() {
        return Err(Error::UnsupportedVariableSimilarity);
    }
    let maps = NormalizationMaps::from_problem(problem)?;
    let (qe, qi, _) = problem.corners();
    let inv = |m: &DMatrix<f64>, name: &'static str| -> Result<DMatrix<f64>> {
        if m.is_empty() {
            return Ok(m.clone());
        }
        m.clone().try_inverse().ok_or(Error::SingularCorner(name))
    };
    let q_external_inv = inv(&qe, "qe")?;
    let q_internal_inv = inv(&qi, "qi")?;
    let (v0e, v0i, v1i) = problem.boundary.endpoint_matrices();
    let nonlocal = problem.boundary.has_kernel() || problem.boundary.interior_atoms().next().is_some();
    Ok(NormalizedProblem {
        v0e: v0e * &qe,
        v0i: v0i * &qi,
        v1i: v1i * &qi,
        maps,
        edge_ids: problem.graph.edge_ids(),
        external_signs: problem.external_signs().to_vec(),
        internal_signs: problem.internal_signs().to_vec(),
        q_external: qe,
        q_internal: qi,
        q_external_inv,
        q_internal_inv,
        nonlocal,
    })
}

impl NormalizedProblem {
    pub fn ell(&self) -> usize {
        self.external_signs.len()
    }

    pub fn m(&self) -> usize {
        self.internal_signs.len()
    }

    /// Normalized velocities: (+-1 per external edge, cbar per internal edge).
    pub fn velocities(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.external_signs.iter().map(|&s| s as f64).collect(),
            self.maps.cbar.clone(),
        )
    }

    /// Resample data given on the uniform original grid of [0,1] onto the
    /// uniform normalized grid of the same size: `f o phibar^-1`.
    pub fn push_forward_internal(&self, j: usize, values: &[f64]) -> Result<Vec<f64>> {
        let pts = uniform_points(values);
        let n = values.len();
        (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                Ok(interp(&pts, invert_phi(&self.maps, EdgeRef::Internal(j), x)?))
            })
            .collect()
    }

    /// Inverse of `push_forward_internal`: `g o phibar`.
    pub fn pull_back_internal(&self, j: usize, values: &[f64]) -> Result<Vec<f64>> {
        let pts = uniform_points(values);
        let n = values.len();
        (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                Ok(interp(&pts, self.maps.phibar(j, s)?))
            })
            .collect()
    }

    /// Samples of phibar_j on a uniform grid of `n` points.
    pub fn phibar_table(&self, j: usize, n: usize) -> Result<Vec<(f64, f64)>> {
        (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                Ok((s, self.maps.phibar(j, s)?))
            })
            .collect()
    }

    /// Boundary operator is invertible on the outgoing traces.
    pub fn r0_invertible(&self, tol: f64) -> bool {
        let r0 = crate::wellposedness::r0::assemble_from_parts(
            &self.v0e,
            &self.v0i,
            &self.v1i,
            &self.external_signs,
            &self.internal_signs,
        );
        linalg::is_invertible(&r0, tol)
    }
}

fn uniform_points(values: &[f64]) -> Vec<(f64, f64)> {
    let n = values.len();
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| (i as f64 / (n - 1) as f64, v))
        .collect()
}

/// Plain-data view of the normalization for reports.
#[derive(Debug, Clone, Serialize)]
pub struct NormalizationSummary {
    pub edge_ids: Vec<String>,
    pub external_speeds: Vec<f64>,
    pub cbar: Vec<f64>,
    pub phibar_tables: Vec<Vec<(f64, f64)>>,
}

impl NormalizationSummary {
    pub fn new(np: &NormalizedProblem, n: usize) -> Result<Self> {
        let (ext, cbar) = np.velocities();
        Ok(NormalizationSummary {
            edge_ids: np.edge_ids.clone(),
            external_speeds: ext,
            cbar,
            phibar_tables: (0..np.m()).map(|j| np.phibar_table(j, n)).collect::<Result<_>>()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::velocity::{FieldKind, Profile};

    fn affine_maps() -> NormalizationMaps {
        let f = VelocityField::new(FieldKind::Internal, Profile::Affine { a: 1.0, b: 1.0 }, None).unwrap();
        NormalizationMaps::build(&[], &[f]).unwrap()
    }

    #[test]
    fn cbar_of_affine_field() {
        let m = affine_maps();
        assert!((m.cbar[0] - 1.0 / 2f64.ln()).abs() < 1e-14);
        assert_eq!(m.phibar(0, 1.0).unwrap(), 1.0);
        assert_eq!(m.phibar(0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn inverse_of_phibar() {
        let m = affine_maps();
        let x = invert_phi(&m, EdgeRef::Internal(0), 0.5).unwrap();
        assert!((x - (2f64.sqrt() - 1.0)).abs() < 1e-10);
        assert!(matches!(
            invert_phi(&m, EdgeRef::Internal(0), 1.0 + 1e-9),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn negative_constant_speed_is_identity_map() {
        let f = VelocityField::constant(FieldKind::Internal, -2.0);
        let m = NormalizationMaps::build(&[], &[f]).unwrap();
        assert_eq!(m.cbar[0], -2.0);
        for s in [0.0, 0.25, 0.7] {
            assert!((m.phibar(0, s).unwrap() - s).abs() < 1e-15);
            assert!((invert_phi(&m, EdgeRef::Internal(0), s).unwrap() - s).abs() < 1e-12);
        }
    }
}
