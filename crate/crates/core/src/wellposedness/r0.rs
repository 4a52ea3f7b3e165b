//! Assembly of the q x q matrix R0 from the boundary matrices.

use nalgebra::DMatrix;

use super::boundary::BoundaryData;
use crate::coefficients::SignStructure;
use crate::error::{Error, Result};
use crate::linalg;

/// Checks corner shapes and invertibility.
pub fn check_corners(ss: &SignStructure, qe0: &DMatrix<f64>, qi0: &DMatrix<f64>, qi1: &DMatrix<f64>) -> Result<()> {
    let (ell, m) = (ss.ell(), ss.m());
    for (name, mat, n) in [("qe(0)", qe0, ell), ("qi(0)", qi0, m), ("qi(1)", qi1, m)] {
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimensionMismatch(format!("{name} must be {n}x{n}")));
        }
        if n > 0 && !linalg::is_invertible(mat, 1e-12) {
            return Err(Error::SingularCorner(name));
        }
    }
    Ok(())
}

/// `(V0e qe(0) restricted to rg P-^e, V1i qi(1) P+ - V0i qi(0) P-)`.
pub fn assemble_r0(
    bd: &BoundaryData,
    ss: &SignStructure,
    qe0: &DMatrix<f64>,
    qi0: &DMatrix<f64>,
    qi1: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    bd.validate(ss.boundary_dim, ss.ell(), ss.m())?;
    check_corners(ss, qe0, qi0, qi1)?;
    let (v0e, v0i, v1i) = bd.endpoint_matrices();
    Ok(assemble_from_parts(
        &(v0e * qe0),
        &(v0i * qi0),
        &(v1i * qi1),
        &ss.external_signs,
        &ss.internal_signs,
    ))
}

/// Same as `assemble_r0` for matrices that already carry the corners.
pub fn assemble_from_parts(
    a_e: &DMatrix<f64>,
    a_0: &DMatrix<f64>,
    a_1: &DMatrix<f64>,
    external_signs: &[i8],
    internal_signs: &[i8],
) -> DMatrix<f64> {
    let q = a_0.nrows().max(a_e.nrows());
    let neg: Vec<usize> = (0..external_signs.len()).filter(|&k| external_signs[k] < 0).collect();
    let m = internal_signs.len();
    let mut r0 = DMatrix::zeros(q, neg.len() + m);
    for (c, &k) in neg.iter().enumerate() {
        r0.set_column(c, &a_e.column(k));
    }
    for j in 0..m {
        let col = if internal_signs[j] > 0 {
            a_1.column(j).into_owned()
        } else {
            -a_0.column(j)
        };
        r0.set_column(neg.len() + j, &col);
    }
    r0
}
