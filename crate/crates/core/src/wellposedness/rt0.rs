//! Time discretization of the input-output operator R_{t0} on [0, t0].
//!
//! Unknown boundary inputs are piecewise constant on `n` cells; the
//! operator is collocated at left cell endpoints. Every point evaluation of
//! the boundary operator sees an input delayed by the characteristic travel
//! time to its location, which makes the matrix block lower triangular.

use nalgebra::DMatrix;
use serde::Serialize;

use super::boundary::Side;
use crate::coefficients::NormalizationMaps;
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::TransportProblem;

/// Threshold on sigma_min used as the invertibility proxy.
pub const RT0_TOL: f64 = 1e-6;
/// Midpoints per unit length used to discretize kernels.
pub const KERNEL_POINTS: usize = 256;

#[derive(Debug, Clone)]
pub struct Rt0Result {
    pub matrix: DMatrix<f64>,
    pub sigma_min: f64,
    pub t0: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Rt0Summary {
    pub t0: f64,
    pub n: usize,
    pub size: usize,
    pub sigma_min: f64,
    pub invertible: bool,
}

impl From<&Rt0Result> for Rt0Summary {
    fn from(r: &Rt0Result) -> Self {
        Rt0Summary {
            t0: r.t0,
            n: r.n,
            size: r.matrix.nrows(),
            sigma_min: r.sigma_min,
            invertible: r.sigma_min > RT0_TOL,
        }
    }
}

/// Largest admissible t0: 1/||cbar||_inf, unbounded without internal edges.
pub fn t0_bound(maps: &NormalizationMaps) -> f64 {
    let s = maps.cbar_sup();
    if s > 0.0 {
        1.0 / s
    } else {
        f64::INFINITY
    }
}

struct Atom {
    side: Side,
    at: f64,
    /// q x (l or m), similarity already applied
    weight: DMatrix<f64>,
}

fn collect_atoms(problem: &TransportProblem) -> Vec<Atom> {
    let (ell, m) = (problem.ell(), problem.m());
    let bd = &problem.boundary;
    let qe = |r: f64| problem.q_external.eval(r, ell);
    let qi = |s: f64| problem.q_internal.eval(s, m);
    let mut atoms = vec![
        Atom {
            side: Side::External,
            at: 0.0,
            weight: &bd.v0e * qe(0.0),
        },
        Atom {
            side: Side::Internal,
            at: 0.0,
            weight: &bd.v0i * qi(0.0),
        },
        Atom {
            side: Side::Internal,
            at: 1.0,
            weight: -(&bd.v1i * qi(1.0)),
        },
    ];
    for a in &bd.atoms {
        let q = match a.side {
            Side::External => qe(a.at),
            Side::Internal => qi(a.at),
        };
        atoms.push(Atom {
            side: a.side,
            at: a.at,
            weight: &a.weight * q,
        });
    }
    // The kernel enters with a minus sign: the condition is (Phi - B) f = 0.
    if let Some(k) = &bd.kernel {
        for (side, table) in [(Side::External, &k.external), (Side::Internal, &k.internal)] {
            let Some(table) = table else { continue };
            let (lo, hi) = table.support();
            let len = hi - lo;
            if len <= 0.0 {
                continue;
            }
            let count = ((len * KERNEL_POINTS as f64).ceil() as usize).max(1);
            let dx = len / count as f64;
            for i in 0..count {
                let x = lo + (i as f64 + 0.5) * dx;
                let q = match side {
                    Side::External => qe(x),
                    Side::Internal => qi(x),
                };
                if let Some(w) = table.eval(x) {
                    atoms.push(Atom {
                        side,
                        at: x,
                        weight: -(w * q) * dx,
                    });
                }
            }
        }
    }
    atoms
}

/// Collocation matrix of R_{t0} with `n` cells. `t0 = None` picks the
/// largest admissible value (1 when there are no internal edges).
pub fn discretize_rt0(problem: &TransportProblem, t0: Option<f64>, n: usize) -> Result<Rt0Result> {
    if n == 0 {
        return Err(Error::Precondition("grid size must be positive".into()));
    }
    let maps = NormalizationMaps::from_problem(problem)?;
    let bound = t0_bound(&maps);
    let t0 = t0.unwrap_or(if bound.is_finite() { bound } else { 1.0 });
    if !(t0 > 0.0) {
        return Err(Error::Precondition(format!("t0 must be positive, got {t0}")));
    }
    if t0 > bound * (1.0 + 1e-12) {
        return Err(Error::T0TooLarge { t0, bound });
    }
    let ss = problem.sign_structure();
    let q = ss.boundary_dim;
    let neg = ss.negative_external();
    let h = t0 / n as f64;
    let mut mat = DMatrix::zeros(n * q, n * q);

    for atom in collect_atoms(problem) {
        // (column of the unknown, weight column, delay, sign)
        let mut channels: Vec<(usize, usize, f64, f64)> = Vec::new();
        match atom.side {
            Side::External => {
                for (c, &k) in neg.iter().enumerate() {
                    let d = if atom.at == 0.0 { 0.0 } else { maps.phi(k, atom.at)? };
                    channels.push((c, k, d, 1.0));
                }
            }
            Side::Internal => {
                for j in 0..ss.m() {
                    let xb = maps.phibar(j, atom.at)?;
                    let cb = maps.cbar[j];
                    let (d, sign) = if cb > 0.0 {
                        ((1.0 - xb) / cb.abs(), 1.0)
                    } else {
                        (xb / cb.abs(), -1.0)
                    };
                    channels.push((neg.len() + j, j, d, sign));
                }
            }
        }
        for (col, wcol, d, sign) in channels {
            let w = atom.weight.column(wcol);
            if w.iter().all(|v| *v == 0.0) {
                continue;
            }
            for i in 0..n {
                let shift = i as f64 - d / h;
                if shift < -1e-9 {
                    continue;
                }
                let cell = ((shift + 1e-9).floor() as usize).min(i);
                for r in 0..q {
                    mat[(i * q + r, cell * q + col)] += sign * w[r];
                }
            }
        }
    }
    let sigma_min = if q == 0 { f64::INFINITY } else { linalg::sigma_min(&mat) };
    Ok(Rt0Result {
        matrix: mat,
        sigma_min,
        t0,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn endpoint_only_matches_r0() {
        let p = catalog::pumpkin_weighted(0.3);
        let r = discretize_rt0(&p, None, 16).unwrap();
        let rep = crate::wellposedness::check_semigroup(&p, 1e-10).unwrap();
        assert!((r.sigma_min - rep.sigma_min).abs() < 1e-12);
        assert!(r.sigma_min > 0.1 * rep.sigma_min);
    }

    #[test]
    fn kirchhoff_is_singular() {
        let p = catalog::pumpkin_kirchhoff();
        for n in [16, 32] {
            assert!(discretize_rt0(&p, None, n).unwrap().sigma_min <= 1e-8);
        }
    }

    #[test]
    fn zero_boundary_operator() {
        let p = catalog::pumpkin_weighted(0.5);
        let z = p.with_boundary(p.boundary.scaled(0.0)).unwrap();
        let r = discretize_rt0(&z, None, 8).unwrap();
        assert_eq!(r.matrix, DMatrix::zeros(24, 24));
        assert_eq!(r.sigma_min, 0.0);
    }

    #[test]
    fn t0_too_large() {
        let p = catalog::pumpkin_weighted(0.5);
        assert!(matches!(discretize_rt0(&p, Some(2.0), 8), Err(Error::T0TooLarge { .. })));
    }

    #[test]
    fn kernel_adds_strictly_lower_blocks() {
        let p = catalog::mckendrick();
        let r = discretize_rt0(&p, None, 32).unwrap();
        for i in 0..32 {
            assert_eq!(r.matrix[(i, i)], 1.0);
            for j in i + 1..32 {
                assert_eq!(r.matrix[(i, j)], 0.0);
            }
        }
        assert!(r.sigma_min > RT0_TOL);
    }
}
