//! Small dense linear algebra helpers on top of `nalgebra`.
//!
//! All rank and invertibility decisions go through singular values with a
//! tolerance relative to the spectral norm.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative singular-value threshold for the exact criteria.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Row-major matrix with explicit shape, used for config files and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowMajor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RowMajor {
    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix declared {}x{} but has {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("matrix entries must be finite".into()));
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

impl From<&DMatrix<f64>> for RowMajor {
    fn from(m: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        RowMajor {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Smallest singular value of a square matrix; `+inf` for the empty matrix.
pub fn sigma_min(m: &DMatrix<f64>) -> f64 {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return f64::INFINITY;
    }
    let sv = singular_values(m);
    if m.nrows() != m.ncols() {
        // A rectangular matrix is never invertible; report the min over
        // the min(rows, cols) values that exist.
        return sv[k - 1];
    }
    sv[k - 1]
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Numerical rank with threshold `rel_tol * ||m||_2`.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let Some(&top) = sv.first() else { return 0 };
    let cut = rel_tol * top;
    sv.iter().filter(|&&s| s > cut && s > 0.0).count()
}

/// Square matrix is invertible when `sigma_min > rel_tol * ||m||_2`.
pub fn is_invertible(m: &DMatrix<f64>, rel_tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    if m.is_empty() {
        return true;
    }
    let sv = singular_values(m);
    let top = sv[0];
    let low = *sv.last().unwrap();
    top > 0.0 && low > rel_tol * top
}

/// Determinant via LU; the empty matrix has determinant 1.
pub fn det(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    m.clone().lu().determinant()
}

/// Unit right singular vector belonging to the smallest singular value.
pub fn null_vector(m: &DMatrix<f64>) -> Option<DVector<f64>> {
    if m.is_empty() {
        return None;
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let mut v: DVector<f64> = v_t.row(idx).transpose();
    if m.ncols() > v_t.nrows() {
        return None;
    }
    let n = v.norm();
    if n > 0.0 {
        v /= n;
    }
    Some(v)
}

/// Maximum absolute row sum, the operator norm induced by the max norm.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Moore-Penrose right inverse of a full-row-rank matrix.
pub fn right_inverse(a: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    let r = rank(a, rel_tol);
    if r < a.nrows() {
        return Err(Error::RankDeficient {
            rank: r,
            rows: a.nrows(),
        });
    }
    let gram = a * a.transpose();
    let inv = gram
        .try_inverse()
        .ok_or(Error::RankDeficient { rank: r, rows: a.nrows() })?;
    Ok(a.transpose() * inv)
}

pub fn diag_projection(mask: &[bool]) -> DMatrix<f64> {
    let n = mask.len();
    DMatrix::from_fn(n, n, |i, j| if i == j && mask[i] { 1.0 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_singular_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(rank(&m, DEFAULT_RANK_TOL), 2);
        assert!(!is_invertible(&m, DEFAULT_RANK_TOL));
        let v = null_vector(&m).unwrap();
        assert!((&m * v).norm() < 1e-12);
    }

    #[test]
    fn empty_matrix_conventions() {
        let m = DMatrix::<f64>::zeros(0, 0);
        assert_eq!(det(&m), 1.0);
        assert!(is_invertible(&m, DEFAULT_RANK_TOL));
        assert!(sigma_min(&m).is_infinite());
    }

    #[test]
    fn right_inverse_of_wide_matrix() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 2.0, 0.0, 1.0, 1.0]);
        let r = right_inverse(&a, DEFAULT_RANK_TOL).unwrap();
        let id = &a * &r;
        assert!((id - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn row_major_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let rm = RowMajor::from(&m);
        assert_eq!(rm.data, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(rm.to_matrix().unwrap(), m);
    }
}
