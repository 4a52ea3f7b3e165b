//! Semigroup and group verdicts with certificates.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::r0::{assemble_r0, check_corners};
use crate::error::{Error, Result};
use crate::linalg::{self, RowMajor};
use crate::problem::TransportProblem;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Generator,
    NotGenerator,
    /// A sufficient criterion certifies generation; necessity was not tested.
    SufficientOnly,
    Undecided,
}

impl Verdict {
    /// Generation is certified, exactly or through a sufficient criterion.
    pub fn generates(self) -> bool {
        matches!(self, Verdict::Generator | Verdict::SufficientOnly)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificates {
    pub rank_r0: usize,
    pub det_r0: f64,
    /// Unit vector spanning (approximately) the kernel of R0 when singular.
    pub null_vector: Option<Vec<f64>>,
    /// det(V1 q(1) P+ - V0 q(0) P-), compact case only.
    pub det_m1: Option<f64>,
    /// det(V1 q(1) P- - V0 q(0) P+), compact case only.
    pub det_m2: Option<f64>,
    pub combined_det: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WellPosednessReport {
    pub schema_version: u32,
    pub ell: usize,
    pub m: usize,
    pub boundary_dim: usize,
    pub external_signs: Vec<i8>,
    pub internal_signs: Vec<i8>,
    pub r0: RowMajor,
    pub sigma_min: f64,
    pub r0_norm: f64,
    pub tolerance: f64,
    pub verdict_semigroup: Verdict,
    pub verdict_group: Verdict,
    pub certificates: Certificates,
    pub notes: Vec<String>,
}

fn r0_of(problem: &TransportProblem) -> Result<DMatrix<f64>> {
    let (qe0, qi0, qi1) = problem.corners();
    assemble_r0(&problem.boundary, &problem.sign_structure(), &qe0, &qi0, &qi1)
}

/// Invertibility with threshold relative to the matrix norm; the zero
/// matrix of positive size is singular.
fn nonsingular(m: &DMatrix<f64>, tol: f64) -> bool {
    linalg::is_invertible(m, tol)
}

/// `(M1, M2)` = `(V1 q1 P+ - V0 q0 P-, V1 q1 P- - V0 q0 P+)`, compact case.
pub fn group_matrices(problem: &TransportProblem) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if problem.ell() > 0 {
        return Err(Error::NonCompact);
    }
    let ss = problem.sign_structure();
    let (qe0, q0, q1) = problem.corners();
    check_corners(&ss, &qe0, &q0, &q1)?;
    problem.boundary.validate(ss.boundary_dim, 0, problem.m())?;
    let (_, v0, v1) = problem.boundary.endpoint_matrices();
    let a1 = &v1 * &q1;
    let a0 = &v0 * &q0;
    let m1 = &a1 * &ss.pi_plus - &a0 * &ss.pi_minus;
    let m2 = &a1 * &ss.pi_minus - &a0 * &ss.pi_plus;
    Ok((m1, m2))
}

/// det(V1 q1 P+ q0^T V0^T + V0 q0 P- q1^T V1^T).
pub fn combined_group_det(problem: &TransportProblem) -> Result<f64> {
    if problem.ell() > 0 {
        return Err(Error::NonCompact);
    }
    let ss = problem.sign_structure();
    let (_, q0, q1) = problem.corners();
    let (_, v0, v1) = problem.boundary.endpoint_matrices();
    let mat = &v1 * &q1 * &ss.pi_plus * q0.transpose() * v0.transpose()
        + &v0 * &q0 * &ss.pi_minus * q1.transpose() * v1.transpose();
    Ok(linalg::det(&mat))
}

/// Group verdict for compact problems.
pub fn check_group(problem: &TransportProblem, tol: f64) -> Result<(Verdict, f64, f64)> {
    let (m1, m2) = group_matrices(problem)?;
    let ok = nonsingular(&m1, tol) && nonsingular(&m2, tol);
    let exact = problem.boundary.interior_atoms().next().is_none();
    let verdict = match (ok, exact) {
        (true, true) => Verdict::Generator,
        (false, true) => Verdict::NotGenerator,
        (true, false) => Verdict::SufficientOnly,
        (false, false) => Verdict::Undecided,
    };
    Ok((verdict, linalg::det(&m1), linalg::det(&m2)))
}

/// Full report: semigroup verdict from R0, group verdict for compact graphs.
pub fn check_semigroup(problem: &TransportProblem, tol: f64) -> Result<WellPosednessReport> {
    let r0 = r0_of(problem)?;
    let ss = problem.sign_structure();
    let q = ss.boundary_dim;
    let mut notes = Vec::new();

    let (sigma_min, r0_norm) = if q == 0 {
        (f64::INFINITY, 0.0)
    } else {
        (linalg::sigma_min(&r0), linalg::spectral_norm(&r0))
    };
    let invertible = nonsingular(&r0, tol);
    let exact = problem.boundary.interior_atoms().next().is_none();
    if problem.boundary.has_kernel() {
        notes.push("integral kernel ignored: the verdict is invariant under bounded boundary perturbations".into());
    }
    if q == 0 {
        notes.push("boundary space is trivial; no boundary condition is needed".into());
    }
    let verdict_semigroup = match (invertible, exact) {
        (true, true) => Verdict::Generator,
        (false, true) => Verdict::NotGenerator,
        (true, false) => {
            notes.push("interior point masses present: R0 invertibility is only sufficient".into());
            Verdict::SufficientOnly
        }
        (false, false) => {
            notes.push("interior point masses present and R0 singular: no conclusion".into());
            Verdict::Undecided
        }
    };

    let rank_r0 = linalg::rank(&r0, tol);
    let null_vector = if invertible || q == 0 {
        None
    } else {
        linalg::null_vector(&r0).map(|v| v.iter().copied().collect())
    };

    let (verdict_group, det_m1, det_m2, combined_det) = match check_group(problem, tol) {
        Ok((v, d1, d2)) => (v, Some(d1), Some(d2), combined_group_det(problem).ok()),
        Err(Error::NonCompact) => {
            notes.push("group criterion only available for compact graphs".into());
            (Verdict::Undecided, None, None, None)
        }
        Err(e) => return Err(e),
    };
    if verdict_group == Verdict::Generator && !verdict_semigroup.generates() {
        notes.push("group verdict inconsistent with semigroup verdict".into());
    }

    Ok(WellPosednessReport {
        schema_version: SCHEMA_VERSION,
        ell: problem.ell(),
        m: problem.m(),
        boundary_dim: q,
        external_signs: ss.external_signs.clone(),
        internal_signs: ss.internal_signs.clone(),
        r0: RowMajor::from(&r0),
        sigma_min,
        r0_norm,
        tolerance: tol,
        verdict_semigroup,
        verdict_group,
        certificates: Certificates {
            rank_r0,
            det_r0: linalg::det(&r0),
            null_vector,
            det_m1,
            det_m2,
            combined_det,
        },
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankCheck {
    pub rank: usize,
    pub boundary_dim: usize,
    pub verdict: Verdict,
}

/// Surjectivity of `V0e qe(0) P-^e + V1i qi(1) P+ + V0i qi(0) P-` onto the
/// boundary space; sufficient for generation.
pub fn check_rank_sufficient(problem: &TransportProblem, tol: f64) -> Result<RankCheck> {
    let ss = problem.sign_structure();
    let (qe0, qi0, qi1) = problem.corners();
    check_corners(&ss, &qe0, &qi0, &qi1)?;
    problem.boundary.validate(ss.boundary_dim, ss.ell(), ss.m())?;
    let (v0e, v0i, v1i) = problem.boundary.endpoint_matrices();
    let q = ss.boundary_dim;
    let blocks = [
        &v0e * &qe0 * &ss.pe_minus,
        &v1i * &qi1 * &ss.pi_plus,
        &v0i * &qi0 * &ss.pi_minus,
    ];
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut span = DMatrix::zeros(q, cols);
    let mut c = 0;
    for b in &blocks {
        span.view_mut((0, c), (q, b.ncols())).copy_from(b);
        c += b.ncols();
    }
    let rank = if q == 0 { 0 } else { linalg::rank(&span, tol) };
    Ok(RankCheck {
        rank,
        boundary_dim: q,
        verdict: if rank == q { Verdict::SufficientOnly } else { Verdict::Undecided },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::linalg::DEFAULT_RANK_TOL as TOL;

    #[test]
    fn pumpkin_verdicts() {
        let r = check_semigroup(&catalog::pumpkin_kirchhoff(), TOL).unwrap();
        assert_eq!(r.verdict_semigroup, Verdict::NotGenerator);
        assert_eq!(r.certificates.rank_r0, 2);
        assert!(r.certificates.null_vector.is_some());
        let r = check_semigroup(&catalog::pumpkin_weighted(0.3), TOL).unwrap();
        assert_eq!(r.verdict_semigroup, Verdict::Generator);
        assert_eq!(r.verdict_group, Verdict::NotGenerator);
        assert!(r.certificates.det_m2.unwrap().abs() < 1e-14);
        assert!(r.certificates.combined_det.unwrap().abs() < 1e-14);
    }

    #[test]
    fn mckendrick_kernel_noted() {
        let r = check_semigroup(&catalog::mckendrick(), TOL).unwrap();
        assert_eq!(r.verdict_semigroup, Verdict::Generator);
        assert_eq!(r.verdict_group, Verdict::NotGenerator);
        assert!(r.notes.iter().any(|n| n.contains("kernel")));
    }

    #[test]
    fn periodic_edge_is_group() {
        let p = catalog::periodic_edge(-1.0);
        let (v, d1, d2) = check_group(&p, TOL).unwrap();
        assert_eq!(v, Verdict::Generator);
        assert_eq!(d1.abs(), 1.0);
        assert_eq!(d2.abs(), 1.0);
    }

    #[test]
    fn loop_graph_group_iff_all_nonzero() {
        let r = check_semigroup(&catalog::loop_graph(2.0, 3.0, 5.0, 7.0), TOL).unwrap();
        assert_eq!(r.verdict_group, Verdict::Generator);
        let c = r.certificates.combined_det.unwrap();
        assert!((c.abs() - 2.0 * 3.0 * 5.0 * 7.0).abs() < 1e-9);
        let r = check_semigroup(&catalog::loop_graph(2.0, 3.0, 0.0, 7.0), TOL).unwrap();
        assert_eq!(r.verdict_semigroup, Verdict::Generator);
        assert_eq!(r.verdict_group, Verdict::NotGenerator);
        let r = check_semigroup(&catalog::loop_graph(0.0, 3.0, 1.0, 1.0), TOL).unwrap();
        assert_eq!(r.verdict_semigroup, Verdict::NotGenerator);
    }

    #[test]
    fn rank_check_examples() {
        let five = check_rank_sufficient(&catalog::five_four(), TOL).unwrap();
        assert_eq!((five.rank, five.boundary_dim), (7, 7));
        assert_eq!(five.verdict, Verdict::SufficientOnly);
        let zero = catalog::pumpkin_weighted(0.5);
        let q = zero.boundary.rows();
        let bd = zero.boundary.scaled(0.0);
        let zero = zero.with_boundary(bd).unwrap();
        let r = check_rank_sufficient(&zero, TOL).unwrap();
        assert_eq!((r.rank, r.boundary_dim, r.verdict), (0, q, Verdict::Undecided));
    }

    #[test]
    fn non_compact_group_is_undecided() {
        assert!(matches!(combined_group_det(&catalog::star(2, 3, &[0.5; 6])), Err(Error::NonCompact)));
        let r = check_semigroup(&catalog::star(2, 3, &[0.5; 6]), TOL).unwrap();
        assert_eq!(r.verdict_group, Verdict::Undecided);
        assert_eq!(r.verdict_semigroup, Verdict::Generator);
    }
}
