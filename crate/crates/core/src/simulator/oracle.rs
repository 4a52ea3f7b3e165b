//! Closed-form solution of compact unit-speed problems via powers of the
//! adjacency matrix: `u_j(t,s) = (B^n f0)_j(s - t + n)`, `n = ceil(t - s)+`.

use nalgebra::{DMatrix, DVector};

use super::profile::EdgeProfile;
use crate::error::{Error, Result};
use crate::linalg::DEFAULT_RANK_TOL;
use crate::problem::TransportProblem;
use crate::wellposedness::adjacency_form;

/// Exact profiles at time `t` on the uniform grid with `n_s` cells.
/// `f0` follows `edge_ids()` order.
pub fn oracle_adjacency(problem: &TransportProblem, f0: &[EdgeProfile], t: f64, n_s: usize) -> Result<Vec<EdgeProfile>> {
    if problem.ell() > 0 {
        return Err(Error::Precondition("oracle needs a compact graph".into()));
    }
    let m = problem.m();
    if f0.len() != m {
        return Err(Error::DimensionMismatch(format!("expected {m} profiles, got {}", f0.len())));
    }
    if !problem.q_internal.is_constant() || problem.q_internal.eval(0.0, m) != DMatrix::identity(m, m) {
        return Err(Error::Precondition("oracle needs the identity similarity".into()));
    }
    for v in &problem.internal_velocities {
        for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
            if (v.value(s) + 1.0).abs() > 1e-12 {
                return Err(Error::Precondition("oracle needs unit speed -1 on every edge".into()));
            }
        }
    }
    if !(t >= 0.0) {
        return Err(Error::Precondition(format!("time must be nonnegative, got {t}")));
    }
    let b = adjacency_form(&problem.boundary, &problem.sign_structure(), DEFAULT_RANK_TOL)?.b;

    let grid: Vec<f64> = (0..=n_s).map(|i| i as f64 / n_s as f64).collect();
    let mut values = vec![vec![0.0; n_s + 1]; m];
    let mut powers = vec![DMatrix::identity(m, m)];
    for (i, &s) in grid.iter().enumerate() {
        let n = (t - s - 1e-12).ceil().max(0.0) as usize;
        while powers.len() <= n {
            let next = &b * powers.last().unwrap();
            powers.push(next);
        }
        let arg = s - t + n as f64;
        let f = DVector::from_iterator(m, f0.iter().map(|p| p.eval(arg.clamp(0.0, 1.0))));
        let u = &powers[n] * f;
        for j in 0..m {
            values[j][i] = u[j];
        }
    }
    Ok(f0
        .iter()
        .zip(values)
        .map(|(p, v)| EdgeProfile {
            edge: p.edge.clone(),
            grid: grid.clone(),
            values: v,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn time_zero_is_identity() {
        let p = catalog::loop_graph(1.0, 1.0, 1.0, 1.0);
        let f0 = vec![
            EdgeProfile::sample("e1", 1.0, 8, |s| s),
            EdgeProfile::sample("e2", 1.0, 8, |s| 1.0 - s),
        ];
        let u = oracle_adjacency(&p, &f0, 0.0, 8).unwrap();
        assert_eq!(u, f0);
    }

    #[test]
    fn integer_time_applies_matrix_power() {
        let p = catalog::loop_graph(1.0, 1.0, 2.0, 0.5);
        let f0 = vec![
            EdgeProfile::sample("e1", 1.0, 8, |s| s),
            EdgeProfile::sample("e2", 1.0, 8, |s| 1.0 - s),
        ];
        // B = [[0, 2], [0.5, 0]], B^2 = I
        let u = oracle_adjacency(&p, &f0, 2.0, 8).unwrap();
        for i in 0..8 {
            assert!((u[0].values[i] - f0[0].values[i]).abs() < 1e-14);
        }
        let u = oracle_adjacency(&p, &f0, 1.0, 8).unwrap();
        for i in 0..8 {
            assert!((u[0].values[i] - 2.0 * f0[1].values[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_compact() {
        let p = catalog::halfline_interval(1.0, 0.5, 0.3, 0.7, 0.2, 1.0).unwrap();
        assert!(matches!(oracle_adjacency(&p, &[], 1.0, 8), Err(Error::Precondition(_))));
    }
}
