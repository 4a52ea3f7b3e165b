//! Similarity matrices q(x) diagonalizing the velocity matrix per block.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub enum Similarity {
    Identity,
    Constant(DMatrix<f64>),
    /// A + x B
    Affine { a: DMatrix<f64>, b: DMatrix<f64> },
    /// Piecewise-linear in x between the given nodes.
    Tabulated(Vec<(f64, DMatrix<f64>)>),
}

impl Similarity {
    pub fn is_constant(&self) -> bool {
        match self {
            Similarity::Identity | Similarity::Constant(_) => true,
            Similarity::Affine { b, .. } => b.iter().all(|v| *v == 0.0),
            Similarity::Tabulated(t) => t.windows(2).all(|w| w[0].1 == w[1].1),
        }
    }

    pub fn eval(&self, x: f64, n: usize) -> DMatrix<f64> {
        match self {
            Similarity::Identity => DMatrix::identity(n, n),
            Similarity::Constant(m) => m.clone(),
            Similarity::Affine { a, b } => a + b * x,
            Similarity::Tabulated(t) => {
                if x <= t[0].0 {
                    return t[0].1.clone();
                }
                let last = &t[t.len() - 1];
                if x >= last.0 {
                    return last.1.clone();
                }
                let i = t.partition_point(|p| p.0 <= x) - 1;
                let (x0, m0) = (&t[i].0, &t[i].1);
                let (x1, m1) = (&t[i + 1].0, &t[i + 1].1);
                let w = (x - x0) / (x1 - x0);
                m0 * (1.0 - w) + m1 * w
            }
        }
    }

    /// Shape check and invertibility at `samples`.
    pub fn validate(&self, n: usize, samples: &[f64]) -> Result<()> {
        let shape_ok = |m: &DMatrix<f64>| m.nrows() == n && m.ncols() == n;
        let ok = match self {
            Similarity::Identity => true,
            Similarity::Constant(m) => shape_ok(m),
            Similarity::Affine { a, b } => shape_ok(a) && shape_ok(b),
            Similarity::Tabulated(t) => {
                if t.is_empty() || t.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::Config("similarity table needs increasing nodes".into()));
                }
                t.iter().all(|(_, m)| shape_ok(m))
            }
        };
        if !ok {
            return Err(Error::DimensionMismatch(format!("similarity block must be {n}x{n}")));
        }
        if n == 0 {
            return Ok(());
        }
        let mut xs = samples.to_vec();
        if let Similarity::Tabulated(t) = self {
            xs.extend(t.iter().map(|p| p.0));
        }
        for x in xs {
            if !linalg::is_invertible(&self.eval(x, n), 1e-12) {
                return Err(Error::SingularSimilarity(x));
            }
        }
        Ok(())
    }
}
