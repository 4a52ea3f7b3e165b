//! Characteristic solver for the normalized system.
//!
//! Each normalized channel is a pure shift. A sample value is found by
//! following its characteristic backwards: either it reaches t = 0 inside the
//! edge, or it leaves through the entry end and the stored trace at the exit
//! time is used. Entry traces are the unknowns of the vertex system, solved
//! with one factorization per problem.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::diagnostics::{total_mass, vertex_flux_balance};
use super::profile::EdgeProfile;
use crate::coefficients::{normalize, NormalizedProblem, Profile, VelocityField};
use crate::error::{Error, Result};
use crate::linalg::{self, DEFAULT_RANK_TOL};
use crate::problem::TransportProblem;

/// Snap distance for characteristic feet landing on an edge end.
const FOOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSettings {
    pub t_end: f64,
    pub dt: f64,
    /// Cells per unit length of the output grids.
    pub n_s: usize,
    /// Truncation of the external edges in normalized coordinates.
    pub r_max: Option<f64>,
    /// Store a frame every this many steps (the last step is always stored).
    pub output_every: usize,
    /// Relative tolerance of the well-posedness gate.
    pub tol: f64,
}

impl SimulationSettings {
    pub fn new(t_end: f64, dt: f64, n_s: usize) -> Self {
        SimulationSettings {
            t_end,
            dt,
            n_s,
            r_max: None,
            output_every: 1,
            tol: DEFAULT_RANK_TOL,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.r_max.unwrap_or_else(|| (2.0 * self.t_end).max(10.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceChannel {
    pub edge: String,
    /// Edge coordinate of the trace (0 or 1).
    pub at: f64,
    /// Fed by the vertex condition rather than by arriving material.
    pub unknown: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceHistory {
    pub channels: Vec<TraceChannel>,
    pub times: Vec<f64>,
    /// `values[c][k]`: normalized trace of channel `c` at `times[k]`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frame {
    pub t: f64,
    pub profiles: Vec<EdgeProfile>,
    pub mass: f64,
    pub flux_balance: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub frames: Vec<Frame>,
    pub traces: TraceHistory,
    /// Largest boundary-condition residual over all steps.
    pub max_boundary_residual: f64,
}

impl Trajectory {
    pub fn frame_at(&self, t: f64) -> Option<&Frame> {
        self.frames.iter().find(|f| (f.t - t).abs() < 1e-9)
    }

    pub fn masses(&self) -> Vec<(f64, f64)> {
        self.frames.iter().map(|f| (f.t, f.mass)).collect()
    }
}

#[derive(Debug, Clone, Copy)]
enum Chan {
    Ext(usize),
    Int(usize),
}

/// Original coordinate of a normalized point.
fn to_original(field: &VelocityField, internal: bool, x: f64, phi_one: f64) -> Result<f64> {
    if let Profile::Constant { value } = field.profile {
        return Ok(if internal { x } else { x * value.abs() });
    }
    if internal {
        if x >= 1.0 {
            return Ok(1.0);
        }
        field.invert_phi((x * phi_one).clamp(phi_one.min(0.0), phi_one.max(0.0)))
    } else {
        field.invert_phi(x)
    }
}

fn to_normalized(np: &NormalizedProblem, chan: Chan, y: f64) -> Result<f64> {
    match chan {
        Chan::Ext(k) => match np.maps.external[k].profile {
            Profile::Constant { value } => Ok(y / value.abs()),
            _ => np.maps.phi(k, y),
        },
        Chan::Int(j) => match np.maps.internal[j].profile {
            Profile::Constant { .. } => Ok(y),
            _ => np.maps.phibar(j, y),
        },
    }
}

fn uniform(len: f64, cells: usize) -> Vec<f64> {
    (0..=cells).map(|i| len * i as f64 / cells as f64).collect()
}

fn lerp_uniform(values: &[f64], h: f64, x: f64) -> f64 {
    let n = values.len();
    if n == 0 || x < 0.0 {
        return 0.0;
    }
    let pos = x / h;
    let i = pos.floor() as usize;
    if i + 1 >= n {
        return if i + 1 == n && (pos - i as f64) < 1e-9 {
            values[n - 1]
        } else {
            0.0
        };
    }
    let w = pos - i as f64;
    values[i] + (values[i + 1] - values[i]) * w
}

struct State<'a> {
    np: &'a NormalizedProblem,
    dt: f64,
    /// normalized initial data per channel on uniform grids
    init_ext: Vec<Vec<f64>>,
    ext_h: f64,
    init_int: Vec<Vec<f64>>,
    int_h: f64,
    /// unknown column of each negative external channel / internal channel
    ext_unknown: Vec<Option<usize>>,
    int_unknown: Vec<usize>,
    /// unknown traces, `hist[c][k]`
    hist: Vec<Vec<f64>>,
}

impl State<'_> {
    fn trace(&self, c: usize, tau: f64) -> f64 {
        let h = &self.hist[c];
        let pos = (tau / self.dt).max(0.0);
        let i = pos.floor() as usize;
        if i + 1 >= h.len() {
            return h[h.len() - 1];
        }
        let w = pos - i as f64;
        h[i] + (h[i + 1] - h[i]) * w
    }

    /// Normalized value of a channel at `(t, x)`.
    fn value(&self, chan: Chan, t: f64, x: f64) -> f64 {
        match chan {
            Chan::Int(j) => {
                let c = self.np.maps.cbar[j];
                let col = self.int_unknown[j];
                if c < 0.0 {
                    let foot = x - c.abs() * t;
                    if foot >= -FOOT_EPS {
                        lerp_uniform(&self.init_int[j], self.int_h, foot.max(0.0))
                    } else {
                        self.trace(col, t - x / c.abs())
                    }
                } else {
                    let foot = x + c * t;
                    if foot <= 1.0 + FOOT_EPS {
                        lerp_uniform(&self.init_int[j], self.int_h, foot.min(1.0))
                    } else {
                        self.trace(col, t - (1.0 - x) / c)
                    }
                }
            }
            Chan::Ext(k) => match self.ext_unknown[k] {
                Some(col) => {
                    let foot = x - t;
                    if foot >= -FOOT_EPS {
                        lerp_uniform(&self.init_ext[k], self.ext_h, foot.max(0.0))
                    } else {
                        self.trace(col, t - x)
                    }
                }
                None => lerp_uniform(&self.init_ext[k], self.ext_h, x + t),
            },
        }
    }
}

fn find_profile<'a>(f0: &'a [EdgeProfile], id: &str) -> Result<&'a EdgeProfile> {
    f0.iter()
        .find(|p| p.edge == id)
        .ok_or_else(|| Error::Precondition(format!("no initial data for edge `{id}`")))
}

/// Simulate `problem` from the initial data `f0` (original coordinates,
/// one profile per edge id). Only local boundary conditions with constant
/// similarity are supported.
pub fn solve(problem: &TransportProblem, f0: &[EdgeProfile], settings: &SimulationSettings) -> Result<Trajectory> {
    let np = normalize(problem)?;
    if np.nonlocal {
        return Err(Error::UnsupportedMeasure(
            "integral kernels and interior point masses cannot be simulated".into(),
        ));
    }
    if !np.r0_invertible(settings.tol) {
        return Err(Error::NotWellPosed(
            "R0 is singular, the vertex conditions do not determine the outgoing traces".into(),
        ));
    }
    let SimulationSettings { t_end, dt, n_s, .. } = *settings;
    if !(t_end >= 0.0 && t_end.is_finite()) || !(dt > 0.0) || n_s == 0 || settings.output_every == 0 {
        return Err(Error::Precondition(
            "t_end must be nonnegative, dt and n_s positive, output_every positive".into(),
        ));
    }
    let cmin = np.maps.cbar_min();
    let bound = if cmin.is_finite() { 0.25 / np.maps.cbar_sup() } else { f64::INFINITY };
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, bound });
    }
    let r_max = settings.horizon();
    let (ell, m) = (np.ell(), np.m());
    let ext_ids: Vec<&str> = problem.graph.external.iter().map(|e| e.id.as_str()).collect();
    let int_ids: Vec<&str> = problem.graph.internal.iter().map(|e| e.id.as_str()).collect();
    let ext_f0: Vec<&EdgeProfile> = ext_ids.iter().map(|id| find_profile(f0, id)).collect::<Result<_>>()?;
    let int_f0: Vec<&EdgeProfile> = int_ids.iter().map(|id| find_profile(f0, id)).collect::<Result<_>>()?;

    // Normalized initial data, w = q^-1 u composed with the inverse maps.
    let int_h = 1.0 / n_s as f64;
    let int_grid = uniform(1.0, n_s);
    let mut init_int = vec![vec![0.0; n_s + 1]; m];
    for j in 0..m {
        for (i, &x) in int_grid.iter().enumerate() {
            let s = to_original(&np.maps.internal[j], true, x, np.maps.phi_one[j])?;
            init_int[j][i] = (0..m).map(|l| np.q_internal_inv[(j, l)] * int_f0[l].eval(s)).sum();
        }
    }
    let ext_cells = (r_max * n_s as f64).ceil() as usize;
    let ext_h = r_max / ext_cells as f64;
    let ext_grid = uniform(r_max, ext_cells);
    let mut init_ext = vec![vec![0.0; ext_cells + 1]; ell];
    for k in 0..ell {
        for (i, &x) in ext_grid.iter().enumerate() {
            let r = to_original(&np.maps.external[k], false, x, 0.0)?;
            init_ext[k][i] = (0..ell).map(|l| np.q_external_inv[(k, l)] * ext_f0[l].eval(r)).sum();
        }
    }

    // Unknown columns: negative external channels, then every internal channel.
    let neg: Vec<usize> = (0..ell).filter(|&k| np.external_signs[k] < 0).collect();
    let mut ext_unknown = vec![None; ell];
    for (c, &k) in neg.iter().enumerate() {
        ext_unknown[k] = Some(c);
    }
    let int_unknown: Vec<usize> = (0..m).map(|j| neg.len() + j).collect();
    let q = neg.len() + m;

    // M z = -(known contributions); M = (V0e on rg P-, V0i P- - V1i P+).
    let mut mat = DMatrix::zeros(q, q);
    for (c, &k) in neg.iter().enumerate() {
        mat.set_column(c, &np.v0e.column(k));
    }
    for j in 0..m {
        let col = if np.maps.cbar[j] < 0.0 {
            np.v0i.column(j).into_owned()
        } else {
            -np.v1i.column(j)
        };
        mat.set_column(neg.len() + j, &col);
    }
    let lu = mat.clone().lu();
    if q > 0 && !linalg::is_invertible(&mat, settings.tol) {
        return Err(Error::SingularVertexSolve);
    }

    let n_steps = {
        let r = t_end / dt;
        if (r - r.round()).abs() < 1e-9 {
            r.round() as usize
        } else {
            r.ceil() as usize
        }
    };

    let mut channels = Vec::new();
    for &k in &neg {
        channels.push(TraceChannel { edge: ext_ids[k].into(), at: 0.0, unknown: true });
    }
    for j in 0..m {
        let at = if np.maps.cbar[j] < 0.0 { 0.0 } else { 1.0 };
        channels.push(TraceChannel { edge: int_ids[j].into(), at, unknown: true });
    }
    for k in (0..ell).filter(|&k| np.external_signs[k] > 0) {
        channels.push(TraceChannel { edge: ext_ids[k].into(), at: 0.0, unknown: false });
    }
    for j in 0..m {
        let at = if np.maps.cbar[j] < 0.0 { 1.0 } else { 0.0 };
        channels.push(TraceChannel { edge: int_ids[j].into(), at, unknown: false });
    }
    let mut known_hist: Vec<Vec<f64>> = vec![Vec::with_capacity(n_steps + 1); channels.len() - q];

    let mut st = State {
        np: &np,
        dt,
        init_ext,
        ext_h,
        init_int,
        int_h,
        ext_unknown,
        int_unknown,
        hist: vec![Vec::with_capacity(n_steps + 1); q],
    };

    // Output grids in original coordinates and their normalized images.
    let r_end = ext_ids
        .iter()
        .enumerate()
        .map(|(k, _)| to_original(&np.maps.external[k], false, r_max, 0.0))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let out_ext_grid = if ell > 0 {
        uniform(r_end, ((r_end * n_s as f64).ceil() as usize).max(1))
    } else {
        Vec::new()
    };
    let out_ext_x: Vec<Vec<f64>> = (0..ell)
        .map(|k| out_ext_grid.iter().map(|&r| to_normalized(&np, Chan::Ext(k), r)).collect())
        .collect::<Result<_>>()?;
    let out_int_x: Vec<Vec<f64>> = (0..m)
        .map(|j| int_grid.iter().map(|&s| to_normalized(&np, Chan::Int(j), s)).collect())
        .collect::<Result<_>>()?;

    let mut frames = Vec::new();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut max_res: f64 = 0.0;
    for step in 0..=n_steps {
        let t = step as f64 * dt;
        times.push(t);
        // Endpoint values of every channel; unknown ones are filled below.
        let mut fe0 = DVector::zeros(ell);
        let mut fi0 = DVector::zeros(m);
        let mut fi1 = DVector::zeros(m);
        let mut known = Vec::with_capacity(channels.len() - q);
        for k in (0..ell).filter(|&k| np.external_signs[k] > 0) {
            fe0[k] = st.value(Chan::Ext(k), t, 0.0);
            known.push(fe0[k]);
        }
        for j in 0..m {
            if np.maps.cbar[j] < 0.0 {
                fi1[j] = st.value(Chan::Int(j), t, 1.0);
                known.push(fi1[j]);
            } else {
                fi0[j] = st.value(Chan::Int(j), t, 0.0);
                known.push(fi0[j]);
            }
        }
        let rhs = -(&np.v0e * &fe0 + &np.v0i * &fi0 - &np.v1i * &fi1);
        let z = if q > 0 {
            lu.solve(&rhs).ok_or(Error::SingularVertexSolve)?
        } else {
            DVector::zeros(0)
        };
        for (c, &k) in neg.iter().enumerate() {
            fe0[k] = z[c];
        }
        for j in 0..m {
            if np.maps.cbar[j] < 0.0 {
                fi0[j] = z[neg.len() + j];
            } else {
                fi1[j] = z[neg.len() + j];
            }
        }
        for (c, v) in z.iter().enumerate() {
            st.hist[c].push(*v);
        }
        for (c, v) in known.into_iter().enumerate() {
            known_hist[c].push(v);
        }
        if q > 0 {
            let res = (&np.v0e * &fe0 + &np.v0i * &fi0 - &np.v1i * &fi1).norm();
            let scale = 1.0 + fe0.norm() + fi0.norm() + fi1.norm();
            max_res = max_res.max(res / scale);
        }

        if step % settings.output_every == 0 || step == n_steps {
            let mut profiles = Vec::with_capacity(ell + m);
            for l in 0..ell {
                let values = (0..out_ext_grid.len())
                    .map(|i| (0..ell).map(|k| np.q_external[(l, k)] * st.value(Chan::Ext(k), t, out_ext_x[k][i])).sum())
                    .collect();
                profiles.push(EdgeProfile { edge: ext_ids[l].into(), grid: out_ext_grid.clone(), values });
            }
            let w: Vec<Vec<f64>> = (0..m)
                .map(|j| out_int_x[j].iter().map(|&x| st.value(Chan::Int(j), t, x)).collect())
                .collect();
            for l in 0..m {
                let values = (0..int_grid.len())
                    .map(|i| (0..m).map(|j| np.q_internal[(l, j)] * w[j][i]).sum())
                    .collect();
                profiles.push(EdgeProfile { edge: int_ids[l].into(), grid: int_grid.clone(), values });
            }
            frames.push(Frame {
                t,
                mass: total_mass(&profiles),
                flux_balance: vertex_flux_balance(problem, &profiles)?,
                profiles,
            });
        }
    }

    let mut values = st.hist;
    values.extend(known_hist);
    Ok(Trajectory {
        frames,
        traces: TraceHistory { channels, times, values },
        max_boundary_residual: max_res,
    })
}
