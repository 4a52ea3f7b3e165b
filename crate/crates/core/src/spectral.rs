//! Characteristic function `det(Phi L_lambda)` of the generator, a grid
//! based zero locator and the large-lambda growth scan.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::coefficients::{normalize, NormalizedProblem};
use crate::error::{Error, Result};
use crate::linalg::{self, DEFAULT_RANK_TOL};
use crate::problem::TransportProblem;

pub type C64 = Complex<f64>;

/// Residual below which a refined point counts as a zero.
pub const ZERO_RESIDUAL: f64 = 1e-8;
/// Refined zeros closer than this are merged.
pub const DEDUP_DIST: f64 = 1e-6;

/// Normalized boundary data with the Dirichlet sections ready to evaluate.
#[derive(Debug, Clone)]
pub struct CharacteristicEvaluator {
    np: NormalizedProblem,
    neg: Vec<usize>,
}

impl CharacteristicEvaluator {
    pub fn new(problem: &TransportProblem) -> Result<Self> {
        let np = normalize(problem)?;
        if np.nonlocal {
            return Err(Error::UnsupportedMeasure(
                "characteristic function needs point evaluations at the edge ends only".into(),
            ));
        }
        let neg = (0..np.ell()).filter(|&k| np.external_signs[k] < 0).collect();
        Ok(CharacteristicEvaluator { np, neg })
    }

    pub fn boundary_dim(&self) -> usize {
        self.neg.len() + self.np.m()
    }

    /// `Phi eps_lambda` on the coordinate sections of the boundary space.
    pub fn matrix(&self, lambda: C64) -> DMatrix<C64> {
        let q = self.boundary_dim();
        let np = &self.np;
        let mut out = DMatrix::from_element(q, q, C64::new(0.0, 0.0));
        for (c, &k) in self.neg.iter().enumerate() {
            for r in 0..q {
                out[(r, c)] = C64::new(np.v0e[(r, k)], 0.0);
            }
        }
        for j in 0..np.m() {
            let cb = np.maps.cbar[j];
            let (w0, w1) = if cb > 0.0 {
                ((-lambda / cb).exp(), C64::new(1.0, 0.0))
            } else {
                (C64::new(1.0, 0.0), (lambda / cb).exp())
            };
            for r in 0..q {
                out[(r, self.neg.len() + j)] = w0 * np.v0i[(r, j)] - w1 * np.v1i[(r, j)];
            }
        }
        out
    }
}

pub fn char_det(ev: &CharacteristicEvaluator, lambda: C64) -> C64 {
    if ev.boundary_dim() == 0 {
        return C64::new(1.0, 0.0);
    }
    ev.matrix(lambda).determinant()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Region {
    fn contains(&self, z: C64) -> bool {
        let slack = 1e-9;
        z.re >= self.re.0 - slack && z.re <= self.re.1 + slack && z.im >= self.im.0 - slack && z.im <= self.im.1 + slack
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxZero {
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumScan {
    /// `(re, im, |char_det|)` row by row, imaginary part fastest.
    pub grid: Vec<(f64, f64, f64)>,
    pub zeros: Vec<ApproxZero>,
    pub identically_zero: bool,
}

fn newton(ev: &CharacteristicEvaluator, mut z: C64) -> C64 {
    for _ in 0..60 {
        let f = char_det(ev, z);
        let h = 1e-6 * (1.0 + z.norm());
        let df = (char_det(ev, z + h) - char_det(ev, z - h)) / (2.0 * h);
        if df.norm() == 0.0 || !df.is_finite() {
            break;
        }
        let step = f / df;
        z -= step;
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Heuristic zero search: grid minima of `|char_det|` refined by Newton.
pub fn spectrum_scan(ev: &CharacteristicEvaluator, region: Region, n: usize) -> SpectrumScan {
    let n = n.max(2);
    let at = |a: f64, b: f64, i: usize| a + (b - a) * i as f64 / (n - 1) as f64;
    let mut vals = vec![vec![0.0; n]; n];
    let mut grid = Vec::with_capacity(n * n);
    for (i, row) in vals.iter_mut().enumerate() {
        let re = at(region.re.0, region.re.1, i);
        for (j, v) in row.iter_mut().enumerate() {
            let im = at(region.im.0, region.im.1, j);
            *v = char_det(ev, C64::new(re, im)).norm();
            grid.push((re, im, *v));
        }
    }
    if vals.iter().flatten().all(|v| *v <= 1e-14) {
        return SpectrumScan {
            grid,
            zeros: Vec::new(),
            identically_zero: true,
        };
    }
    let mut zeros: Vec<ApproxZero> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = vals[i][j];
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= n as i64 || b >= n as i64 {
                        continue;
                    }
                    if vals[a as usize][b as usize] < v {
                        is_min = false;
                    }
                }
            }
            if !is_min {
                continue;
            }
            let z = newton(ev, C64::new(at(region.re.0, region.re.1, i), at(region.im.0, region.im.1, j)));
            let residual = char_det(ev, z).norm();
            if !(residual < ZERO_RESIDUAL) || !region.contains(z) {
                continue;
            }
            if zeros.iter().any(|w| (C64::new(w.re, w.im) - z).norm() < DEDUP_DIST) {
                continue;
            }
            zeros.push(ApproxZero {
                re: z.re,
                im: z.im,
                residual,
            });
        }
    }
    zeros.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    SpectrumScan {
        grid,
        zeros,
        identically_zero: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GrowthVerdict {
    DecaysToZero,
    Grows,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessaryScan {
    /// `(lambda, lambda^(1/p) ||Phi0 L_lambda||_inf)`
    pub rows: Vec<(f64, f64)>,
    pub verdict: GrowthVerdict,
    /// Observed decay factor of the norm per unit lambda, when measurable.
    pub decay_per_unit: Option<f64>,
}

/// Consecutive decreases required at the end of the table.
pub const DECAY_RUN: usize = 5;

pub fn default_lambda_grid() -> Vec<f64> {
    (0..=10).map(|k| 2f64.powi(k)).collect()
}

/// Growth of `lambda^(1/p) ||Phi0 L_lambda||` where `Phi0` is the boundary
/// operator minus its trace part `V L`. Vacuous when `V` is invertible.
pub fn necessary_condition_scan(problem: &TransportProblem, lambdas: &[f64], p: f64) -> Result<NecessaryScan> {
    let ev = CharacteristicEvaluator::new(problem)?;
    let np = &ev.np;
    let q = ev.boundary_dim();
    let mut v = DMatrix::zeros(q, q);
    for (c, &k) in ev.neg.iter().enumerate() {
        v.set_column(c, &np.v0e.column(k));
    }
    for j in 0..np.m() {
        let col = if np.maps.cbar[j] < 0.0 {
            np.v0i.column(j).into_owned()
        } else {
            -np.v1i.column(j)
        };
        v.set_column(ev.neg.len() + j, &col);
    }
    if linalg::is_invertible(&v, DEFAULT_RANK_TOL) {
        return Ok(NecessaryScan {
            rows: Vec::new(),
            verdict: GrowthVerdict::NotApplicable,
            decay_per_unit: None,
        });
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) || lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Precondition("lambda grid must be positive and increasing".into()));
    }
    let mut raw = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let mut phi0 = DMatrix::zeros(q, q);
        for j in 0..np.m() {
            let cb = np.maps.cbar[j];
            let col = if cb > 0.0 {
                np.v0i.column(j) * (-lam / cb).exp()
            } else {
                -np.v1i.column(j) * (lam / cb).exp()
            };
            phi0.set_column(ev.neg.len() + j, &col);
        }
        raw.push(linalg::inf_norm(&phi0));
    }
    let rows: Vec<(f64, f64)> = lambdas
        .iter()
        .zip(&raw)
        .map(|(&l, &n)| (l, l.powf(1.0 / p) * n))
        .collect();

    let tiny = 1e-300;
    let mut run = 0;
    for w in rows.windows(2).rev() {
        let (a, b) = (w[0].1, w[1].1);
        if b < a || (a <= tiny && b <= tiny) {
            run += 1;
        } else {
            break;
        }
    }
    let verdict = if run >= DECAY_RUN && rows.len() > DECAY_RUN {
        GrowthVerdict::DecaysToZero
    } else {
        GrowthVerdict::Grows
    };
    let positive: Vec<(f64, f64)> = lambdas
        .iter()
        .zip(&raw)
        .filter(|(_, &n)| n > 0.0)
        .map(|(&l, &n)| (l, n))
        .collect();
    let decay_per_unit = match positive.as_slice() {
        [.., (l1, n1), (l2, n2)] => Some((n2 / n1).powf(1.0 / (l2 - l1))),
        _ => None,
    };
    Ok(NecessaryScan {
        rows,
        verdict,
        decay_per_unit,
    })
}
