//! Sign projections P+ / P- and the boundary dimension.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::linalg::diag_projection;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignStructure {
    pub external_signs: Vec<i8>,
    pub internal_signs: Vec<i8>,
    #[serde(skip)]
    pub pe_plus: DMatrix<f64>,
    #[serde(skip)]
    pub pe_minus: DMatrix<f64>,
    #[serde(skip)]
    pub pi_plus: DMatrix<f64>,
    #[serde(skip)]
    pub pi_minus: DMatrix<f64>,
    /// rank(P-^e) + m
    pub boundary_dim: usize,
}

pub fn projections(external_signs: &[i8], internal_signs: &[i8]) -> SignStructure {
    let ep: Vec<bool> = external_signs.iter().map(|&s| s > 0).collect();
    let ip: Vec<bool> = internal_signs.iter().map(|&s| s > 0).collect();
    let en: Vec<bool> = ep.iter().map(|b| !b).collect();
    let inn: Vec<bool> = ip.iter().map(|b| !b).collect();
    let rank_minus = en.iter().filter(|&&b| b).count();
    SignStructure {
        external_signs: external_signs.to_vec(),
        internal_signs: internal_signs.to_vec(),
        pe_plus: diag_projection(&ep),
        pe_minus: diag_projection(&en),
        pi_plus: diag_projection(&ip),
        pi_minus: diag_projection(&inn),
        boundary_dim: rank_minus + internal_signs.len(),
    }
}

impl SignStructure {
    pub fn ell(&self) -> usize {
        self.external_signs.len()
    }

    pub fn m(&self) -> usize {
        self.internal_signs.len()
    }

    /// Indices of external edges with negative velocity (outgoing at r=0).
    pub fn negative_external(&self) -> Vec<usize> {
        (0..self.ell()).filter(|&k| self.external_signs[k] < 0).collect()
    }

    pub fn positive_external(&self) -> Vec<usize> {
        (0..self.ell()).filter(|&k| self.external_signs[k] > 0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lasso_dimensions() {
        assert_eq!(projections(&[1, -1], &[-1, -1]).boundary_dim, 3);
        assert_eq!(projections(&[-1, -1], &[-1, -1]).boundary_dim, 4);
        assert_eq!(projections(&[], &[1, -1, 1]).boundary_dim, 3);
    }

    #[test]
    fn projection_algebra() {
        let s = projections(&[1, -1, -1], &[-1, 1]);
        let id3 = DMatrix::<f64>::identity(3, 3);
        assert_eq!(&s.pe_plus + &s.pe_minus, id3);
        assert_eq!(&s.pe_plus * &s.pe_plus, s.pe_plus);
        assert_eq!(&s.pi_plus * &s.pi_minus, DMatrix::zeros(2, 2));
        assert_eq!(s.negative_external(), vec![1, 2]);
    }
}
