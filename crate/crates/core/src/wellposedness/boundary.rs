//! Boundary operator data: endpoint matrices, optional kernel, point masses.
//!
//! The boundary condition reads
//! `V0e fe(0) + V0i fi(0) - V1i fi(1) + sum_atoms W f(x) = B f`
//! where `B` is the integral kernel operator.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Piecewise-linear matrix-valued kernel, zero outside its node range.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub nodes: Vec<(f64, DMatrix<f64>)>,
}

impl KernelTable {
    pub fn eval(&self, x: f64) -> Option<DMatrix<f64>> {
        let first = self.nodes.first()?;
        let last = self.nodes.last()?;
        if x < first.0 || x > last.0 {
            return None;
        }
        let i = self.nodes.partition_point(|p| p.0 <= x).saturating_sub(1).min(self.nodes.len().saturating_sub(2));
        if self.nodes.len() == 1 {
            return Some(first.1.clone());
        }
        let (x0, m0) = (&self.nodes[i].0, &self.nodes[i].1);
        let (x1, m1) = (&self.nodes[i + 1].0, &self.nodes[i + 1].1);
        let w = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        Some(m0 * (1.0 - w) + m1 * w)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.nodes.first().map_or(0.0, |p| p.0), self.nodes.last().map_or(0.0, |p| p.0))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Kernel {
    pub external: Option<KernelTable>,
    pub internal: Option<KernelTable>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    External,
    Internal,
}

/// Matrix-weighted point evaluation `W f(x)` on one side of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMass {
    pub side: Side,
    pub at: f64,
    pub weight: DMatrix<f64>,
}

impl PointMass {
    pub fn is_endpoint(&self) -> bool {
        match self.side {
            Side::External => self.at == 0.0,
            Side::Internal => self.at == 0.0 || self.at == 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub v0e: DMatrix<f64>,
    pub v0i: DMatrix<f64>,
    pub v1i: DMatrix<f64>,
    pub kernel: Option<Kernel>,
    pub atoms: Vec<PointMass>,
}

impl BoundaryData {
    pub fn matrices(v0e: DMatrix<f64>, v0i: DMatrix<f64>, v1i: DMatrix<f64>) -> Self {
        BoundaryData {
            v0e,
            v0i,
            v1i,
            kernel: None,
            atoms: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.v0i.nrows().max(self.v0e.nrows())
    }

    /// `(V0e, V0i, V1i)` with endpoint atoms folded in.
    pub fn endpoint_matrices(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let mut v0e = self.v0e.clone();
        let mut v0i = self.v0i.clone();
        let mut v1i = self.v1i.clone();
        for a in self.atoms.iter().filter(|a| a.is_endpoint()) {
            match (a.side, a.at == 0.0) {
                (Side::External, _) => v0e += &a.weight,
                (Side::Internal, true) => v0i += &a.weight,
                (Side::Internal, false) => v1i -= &a.weight,
            }
        }
        (v0e, v0i, v1i)
    }

    pub fn interior_atoms(&self) -> impl Iterator<Item = &PointMass> {
        self.atoms.iter().filter(|a| !a.is_endpoint())
    }

    pub fn has_kernel(&self) -> bool {
        self.kernel
            .as_ref()
            .is_some_and(|k| k.external.is_some() || k.internal.is_some())
    }

    pub fn validate(&self, q: usize, ell: usize, m: usize) -> Result<()> {
        let check = |name: &str, mat: &DMatrix<f64>, cols: usize| -> Result<()> {
            if mat.nrows() != q || mat.ncols() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {q}x{cols}",
                    mat.nrows(),
                    mat.ncols()
                )));
            }
            if mat.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("{name} has non-finite entries")));
            }
            Ok(())
        };
        check("V0e", &self.v0e, ell)?;
        check("V0i", &self.v0i, m)?;
        check("V1i", &self.v1i, m)?;
        if let Some(k) = &self.kernel {
            if let Some(t) = &k.external {
                for (_, w) in &t.nodes {
                    check("external kernel", w, ell)?;
                }
            }
            if let Some(t) = &k.internal {
                for (_, w) in &t.nodes {
                    check("internal kernel", w, m)?;
                }
            }
        }
        for a in &self.atoms {
            let cols = match a.side {
                Side::External => ell,
                Side::Internal => m,
            };
            check("point mass weight", &a.weight, cols)?;
            let bad = match a.side {
                Side::External => a.at < 0.0,
                Side::Internal => !(0.0..=1.0).contains(&a.at),
            };
            if bad || !a.at.is_finite() {
                return Err(Error::Config(format!("point mass location {} outside its edge", a.at)));
            }
        }
        Ok(())
    }

    /// All matrices, kernels and weights multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let scale_table = |t: &KernelTable| KernelTable {
            nodes: t.nodes.iter().map(|(x, w)| (*x, w * alpha)).collect(),
        };
        BoundaryData {
            v0e: &self.v0e * alpha,
            v0i: &self.v0i * alpha,
            v1i: &self.v1i * alpha,
            kernel: self.kernel.as_ref().map(|k| Kernel {
                external: k.external.as_ref().map(scale_table),
                internal: k.internal.as_ref().map(scale_table),
            }),
            atoms: self
                .atoms
                .iter()
                .map(|a| PointMass {
                    weight: &a.weight * alpha,
                    ..a.clone()
                })
                .collect(),
        }
    }
}
