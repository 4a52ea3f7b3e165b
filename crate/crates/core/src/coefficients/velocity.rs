//! Scalar velocity fields on internal ([0,1]) and external (R+) edges.

use serde::{Deserialize, Serialize};

use super::quadrature;
use crate::error::{Error, Result};

/// Strict-sign floor for `c(0) * c(x)`.
pub const SIGN_EPS: f64 = 1e-12;
/// Relative accuracy requested from quadrature.
pub const PHI_REL_TOL: f64 = 1e-12;
const QUAD_BUDGET: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    External,
    Internal,
}

/// Closed-form presets or a monotone piecewise-linear table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { value: f64 },
    /// a + b x
    Affine { a: f64, b: f64 },
    /// a exp(b x)
    Exponential { a: f64, b: f64 },
    /// 1 / (a + b x)
    ReciprocalAffine { a: f64, b: f64 },
    /// (x, value) pairs with strictly increasing x
    Tabulated { points: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub kind: FieldKind,
    pub profile: Profile,
    /// External fields are constant beyond this abscissa.
    pub horizon: Option<f64>,
    /// Cumulative integrals of 1/lambda at table nodes (tabulated only).
    cumulative: Vec<f64>,
}

impl VelocityField {
    pub fn new(kind: FieldKind, profile: Profile, horizon: Option<f64>) -> Result<Self> {
        let mut v = VelocityField {
            kind,
            profile,
            horizon,
            cumulative: Vec::new(),
        };
        v.validate_shape()?;
        if let Profile::Tabulated { points } = &v.profile {
            let mut acc = vec![0.0];
            for w in points.windows(2) {
                let (x0, y0) = w[0];
                let (x1, y1) = w[1];
                let seg = quadrature::integrate(
                    |x| 1.0 / (y0 + (y1 - y0) * (x - x0) / (x1 - x0)),
                    x0,
                    x1,
                    PHI_REL_TOL,
                    QUAD_BUDGET,
                )?;
                acc.push(acc.last().unwrap() + seg);
            }
            v.cumulative = acc;
        }
        Ok(v)
    }

    pub fn constant(kind: FieldKind, value: f64) -> Self {
        VelocityField {
            kind,
            profile: Profile::Constant { value },
            horizon: None,
            cumulative: Vec::new(),
        }
    }

    fn validate_shape(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        match &self.profile {
            Profile::Constant { value } if !finite(*value) => return Err(Error::UnboundedField(String::new())),
            Profile::Affine { a, b } | Profile::Exponential { a, b } | Profile::ReciprocalAffine { a, b }
                if !finite(*a) || !finite(*b) =>
            {
                return Err(Error::UnboundedField(String::new()))
            }
            Profile::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(Error::Config("tabulated field needs at least two points".into()));
                }
                if points.iter().any(|(x, y)| !finite(*x) || !finite(*y)) {
                    return Err(Error::UnboundedField(String::new()));
                }
                if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::Config("tabulated abscissae must be strictly increasing".into()));
                }
                // Tables are integrated at construction, so catch a sign
                // change at the nodes before quadrature sees a pole.
                let y0 = points[0].1;
                if let Some(&(x, _)) = points.iter().find(|(_, y)| y0 * y <= SIGN_EPS) {
                    return Err(Error::SignViolation { edge: String::new(), at: x });
                }
                if points[0].0 != 0.0 {
                    return Err(Error::Config("tabulated field must start at 0".into()));
                }
                if self.kind == FieldKind::Internal && points.last().unwrap().0 < 1.0 {
                    return Err(Error::Config("internal tabulated field must cover [0,1]".into()));
                }
            }
            _ => {}
        }
        if self.kind == FieldKind::External {
            if let Some(h) = self.horizon {
                if !(h.is_finite() && h > 0.0) {
                    return Err(Error::Config("horizon must be positive and finite".into()));
                }
            } else if !matches!(self.profile, Profile::Constant { .. } | Profile::Tabulated { .. }) {
                // A non-constant closed form on R+ has no tail to continue with.
                let is_flat = match &self.profile {
                    Profile::Affine { b, .. } | Profile::Exponential { b, .. } | Profile::ReciprocalAffine { b, .. } => {
                        *b == 0.0
                    }
                    _ => false,
                };
                if !is_flat {
                    return Err(Error::UnboundedField(String::new()));
                }
            }
        }
        Ok(())
    }

    /// Abscissa beyond which an external field is constant.
    pub fn tail_start(&self) -> Option<f64> {
        match (&self.profile, self.horizon) {
            (_, Some(h)) => Some(h),
            (Profile::Tabulated { points }, None) => Some(points.last().unwrap().0),
            _ => None,
        }
    }

    fn raw(&self, x: f64) -> f64 {
        match &self.profile {
            Profile::Constant { value } => *value,
            Profile::Affine { a, b } => a + b * x,
            Profile::Exponential { a, b } => a * (b * x).exp(),
            Profile::ReciprocalAffine { a, b } => 1.0 / (a + b * x),
            Profile::Tabulated { points } => interp(points, x),
        }
    }

    /// Velocity at `x`, continued as a constant past the tail start.
    pub fn value(&self, x: f64) -> f64 {
        match (self.kind, self.tail_start()) {
            (FieldKind::External, Some(h)) if x > h => self.raw(h),
            _ => self.raw(x),
        }
    }

    /// Domain end used by sign checks and quadrature.
    fn domain_end(&self) -> f64 {
        match self.kind {
            FieldKind::Internal => 1.0,
            FieldKind::External => self.tail_start().unwrap_or(1.0),
        }
    }

    /// Signed integral of 1/lambda from 0 to x over the non-tail part.
    fn signed_integral_closed(&self, x: f64) -> f64 {
        match &self.profile {
            Profile::Constant { value } => x / value,
            Profile::Affine { a, b } => {
                if *b == 0.0 {
                    x / a
                } else {
                    (b * x / a).ln_1p() / b
                }
            }
            Profile::Exponential { a, b } => {
                if *b == 0.0 {
                    x / a
                } else {
                    -(-b * x).exp_m1() / (a * b)
                }
            }
            Profile::ReciprocalAffine { a, b } => a * x + 0.5 * b * x * x,
            Profile::Tabulated { points } => {
                let i = segment(points, x);
                let (x0, y0) = points[i];
                let (x1, y1) = points[i + 1];
                if x == x0 {
                    return self.cumulative[i];
                }
                let part = quadrature::integrate(
                    |s| 1.0 / (y0 + (y1 - y0) * (s - x0) / (x1 - x0)),
                    x0,
                    x.min(x1),
                    PHI_REL_TOL,
                    QUAD_BUDGET,
                )
                .unwrap_or_else(|_| {
                    // Closed form of the same linear segment.
                    let slope = (y1 - y0) / (x1 - x0);
                    if slope == 0.0 {
                        (x - x0) / y0
                    } else {
                        ((y0 + slope * (x - x0)) / y0).ln() / slope
                    }
                });
                self.cumulative[i] + part
            }
        }
    }

    /// Reparametrization value: `int_0^x 1/|lambda|` for external fields,
    /// `int_0^x 1/lambda` for internal ones.
    pub fn phi(&self, x: f64) -> Result<f64> {
        if x < 0.0 || (self.kind == FieldKind::Internal && x > 1.0) {
            return Err(Error::OutOfRange {
                value: x,
                lo: 0.0,
                hi: if self.kind == FieldKind::Internal { 1.0 } else { f64::INFINITY },
            });
        }
        match self.kind {
            FieldKind::Internal => Ok(self.signed_integral_closed(x)),
            FieldKind::External => {
                let sign = self.value(0.0).signum();
                match self.tail_start() {
                    Some(h) if x > h => {
                        Ok(sign * self.signed_integral_closed(h) + (x - h) / self.raw(h).abs())
                    }
                    _ => Ok(sign * self.signed_integral_closed(x)),
                }
            }
        }
    }

    /// Same quantity as `phi`, always by adaptive quadrature of the field.
    pub fn phi_by_quadrature(&self, x: f64) -> Result<f64> {
        let sign = match self.kind {
            FieldKind::External => self.value(0.0).signum(),
            FieldKind::Internal => 1.0,
        };
        let mut brk = vec![0.0];
        if let Profile::Tabulated { points } = &self.profile {
            brk.extend(points.iter().map(|p| p.0).filter(|&p| p > 0.0 && p < x));
        }
        if let Some(h) = self.tail_start() {
            if self.kind == FieldKind::External && h < x {
                brk.push(h);
            }
        }
        brk.push(x);
        let mut total = 0.0;
        for w in brk.windows(2) {
            total += quadrature::integrate(|s| sign / self.value(s), w[0], w[1], PHI_REL_TOL, QUAD_BUDGET)?;
        }
        Ok(total)
    }

    /// Inverse of `phi` on a bracket, Newton steps guarded by bisection.
    pub fn invert_phi(&self, y: f64) -> Result<f64> {
        let (_lo, hi) = match self.kind {
            FieldKind::Internal => (0.0, 1.0),
            FieldKind::External => (0.0, f64::INFINITY),
        };
        let phi_hi = if hi.is_finite() { self.phi(hi)? } else { f64::INFINITY };
        let (ylo, yhi) = if phi_hi >= 0.0 { (0.0, phi_hi) } else { (phi_hi, 0.0) };
        if y < ylo || y > yhi || y.is_nan() {
            return Err(Error::OutOfRange { value: y, lo: ylo, hi: yhi });
        }
        if self.kind == FieldKind::External {
            if let Some(h) = self.tail_start() {
                let ph = self.phi(h)?;
                if y >= ph {
                    return Ok(h + (y - ph) * self.raw(h).abs());
                }
            } else if let Profile::Constant { value } = self.profile {
                return Ok(y * value.abs());
            }
        }
        let end = match self.kind {
            FieldKind::Internal => 1.0,
            FieldKind::External => self.tail_start().unwrap_or_else(|| y * self.value(0.0).abs() * 2.0 + 1.0),
        };
        let increasing = self.phi(end)? >= 0.0;
        let (mut a, mut b) = (0.0, end);
        let tol = 1e-10 * (1.0 + y.abs()) * 1e-3;
        let mut x = if (self.phi(end)? - 0.0).abs() > 0.0 { end * y / self.phi(end)? } else { 0.0 };
        x = x.clamp(a, b);
        for _ in 0..200 {
            let r = self.phi(x)? - y;
            if r.abs() <= tol {
                return Ok(x);
            }
            if (r > 0.0) == increasing {
                b = x;
            } else {
                a = x;
            }
            let dphi = match self.kind {
                FieldKind::Internal => 1.0 / self.value(x),
                FieldKind::External => 1.0 / self.value(x).abs(),
            };
            let newton = x - r / dphi;
            x = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if b - a < 1e-15 * (1.0 + b.abs()) {
                return Ok(x);
            }
        }
        Ok(x)
    }

    /// Common sign of the field, checked on `n_samples` points (uniform on
    /// [0,1] for internal fields, geometric up to the tail for external ones)
    /// plus every table node.
    pub fn validate_sign(&self, n_samples: usize) -> Result<i8> {
        let n = n_samples.max(2);
        let end = self.domain_end();
        let mut xs: Vec<f64> = match self.kind {
            FieldKind::Internal => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
            FieldKind::External => {
                let lo = end * 1e-6;
                let ratio = (end / lo).powf(1.0 / (n - 1) as f64);
                std::iter::once(0.0)
                    .chain((0..n).map(|i| lo * ratio.powi(i as i32)))
                    .collect()
            }
        };
        if let Profile::Tabulated { points } = &self.profile {
            xs.extend(points.iter().map(|p| p.0).filter(|&x| x <= end));
        }
        xs.push(end);
        let c0 = self.raw(0.0);
        for &x in &xs {
            let c = self.raw(x.min(end));
            if !c.is_finite() {
                return Err(Error::UnboundedField(String::new()));
            }
            if c0 * c <= SIGN_EPS {
                return Err(Error::SignViolation {
                    edge: String::new(),
                    at: x,
                });
            }
        }
        // Closed forms are monotone in x, so endpoint checks cover the
        // whole domain; reciprocal-affine can still blow up in between.
        if let Profile::ReciprocalAffine { a, b } = self.profile {
            if a * (a + b * end) <= 0.0 {
                return Err(Error::UnboundedField(String::new()));
            }
        }
        Ok(if c0 > 0.0 { 1 } else { -1 })
    }
}

fn segment(points: &[(f64, f64)], x: f64) -> usize {
    let n = points.len();
    match points.binary_search_by(|p| p.0.total_cmp(&x)) {
        Ok(i) => i.min(n - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(n - 2),
    }
}

/// Piecewise-linear interpolation, constant beyond the table ends.
pub fn interp(points: &[(f64, f64)], x: f64) -> f64 {
    if x <= points[0].0 {
        return points[0].1;
    }
    let last = points[points.len() - 1];
    if x >= last.0 {
        return last.1;
    }
    let i = segment(points, x);
    let (x0, y0) = points[i];
    let (x1, y1) = points[i + 1];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}
