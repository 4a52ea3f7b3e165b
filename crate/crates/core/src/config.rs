//! JSON problem files with optional CSV side files for tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coefficients::{FieldKind, Profile, Similarity, VelocityField};
use crate::error::{Error, Result};
use crate::graph::{build_graph, GraphSpec};
use crate::linalg::RowMajor;
use crate::problem::TransportProblem;
use crate::simulator::{EdgeProfile, SimulationSettings};
use crate::wellposedness::{BoundaryData, Kernel, KernelTable, PointMass, Side};

pub const CONFIG_VERSION: u32 = 1;

fn default_version() -> u32 {
    CONFIG_VERSION
}

fn default_p() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "default_version")]
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub graph: GraphSpec,
    /// One entry per edge id.
    pub velocities: BTreeMap<String, VelocitySpec>,
    #[serde(default, skip_serializing_if = "SimilaritySection::is_default")]
    pub similarity: SimilaritySection,
    pub boundary: BoundarySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSpec>,
    #[serde(default = "default_p")]
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocitySpec {
    Constant {
        value: f64,
    },
    Affine {
        a: f64,
        b: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<f64>,
    },
    Exponential {
        a: f64,
        b: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<f64>,
    },
    ReciprocalAffine {
        a: f64,
        b: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<f64>,
    },
    Tabulated {
        points: Vec<(f64, f64)>,
    },
    /// Two-column CSV `x,value`, path relative to the config file.
    Csv {
        path: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SimilaritySpec {
    Identity,
    Constant { matrix: RowMajor },
    Affine { a: RowMajor, b: RowMajor },
    Tabulated { nodes: Vec<MatrixNode> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixNode {
    pub x: f64,
    pub matrix: RowMajor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilaritySection {
    pub external: SimilaritySpec,
    pub internal: SimilaritySpec,
}

impl Default for SimilaritySection {
    fn default() -> Self {
        SimilaritySection {
            external: SimilaritySpec::Identity,
            internal: SimilaritySpec::Identity,
        }
    }
}

impl SimilaritySection {
    fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<MatrixNode>,
    /// CSV with columns `x, m11, m12, ...` (row-major); needs `rows`/`cols`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub internal: Option<KernelSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideSpec {
    External,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub side: SideSpec,
    pub at: f64,
    pub weight: RowMajor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub v0e: RowMajor,
    pub v0i: RowMajor,
    pub v1i: RowMajor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Zero,
    Constant { value: f64 },
    /// Tent of the given height and half-width.
    Hat { center: f64, width: f64, height: f64 },
    /// `offset + amplitude sin(2 pi modes x)`
    Sine { modes: f64, amplitude: f64, offset: f64 },
    /// Two-column CSV `x,value`.
    Csv { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub n_s: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_every: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub initial: BTreeMap<String, InitialSpec>,
}

fn field_err(field: &str, e: Error) -> Error {
    match e {
        Error::Config(msg) => Error::Config(format!("{field}: {msg}")),
        Error::DimensionMismatch(msg) => Error::Config(format!("{field}: {msg}")),
        other => other,
    }
}

fn read_csv_rows(base: &Path, rel: &str) -> Result<Vec<Vec<f64>>> {
    let path = base.join(rel);
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(&path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(v),
            // a non-numeric first line is a header
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(Error::Config(format!("{} line {}: {e}", path.display(), line + 1)));
            }
        }
    }
    Ok(rows)
}

fn read_pairs(base: &Path, rel: &str) -> Result<Vec<(f64, f64)>> {
    read_csv_rows(base, rel)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| match r.as_slice() {
            [x, y] => Ok((*x, *y)),
            _ => Err(Error::Config(format!("{rel} row {}: expected two columns", i + 1))),
        })
        .collect()
}

fn similarity_from(spec: &SimilaritySpec) -> Result<Similarity> {
    Ok(match spec {
        SimilaritySpec::Identity => Similarity::Identity,
        SimilaritySpec::Constant { matrix } => Similarity::Constant(matrix.to_matrix()?),
        SimilaritySpec::Affine { a, b } => Similarity::Affine {
            a: a.to_matrix()?,
            b: b.to_matrix()?,
        },
        SimilaritySpec::Tabulated { nodes } => Similarity::Tabulated(
            nodes
                .iter()
                .map(|n| Ok((n.x, n.matrix.to_matrix()?)))
                .collect::<Result<_>>()?,
        ),
    })
}

fn similarity_to(s: &Similarity) -> SimilaritySpec {
    match s {
        Similarity::Identity => SimilaritySpec::Identity,
        Similarity::Constant(m) => SimilaritySpec::Constant { matrix: m.into() },
        Similarity::Affine { a, b } => SimilaritySpec::Affine { a: a.into(), b: b.into() },
        Similarity::Tabulated(t) => SimilaritySpec::Tabulated {
            nodes: t.iter().map(|(x, m)| MatrixNode { x: *x, matrix: m.into() }).collect(),
        },
    }
}

fn kernel_from(spec: &KernelSpec, base: &Path) -> Result<KernelTable> {
    let mut nodes: Vec<(f64, DMatrix<f64>)> = spec
        .nodes
        .iter()
        .map(|n| Ok((n.x, n.matrix.to_matrix()?)))
        .collect::<Result<_>>()?;
    if let Some(rel) = &spec.csv {
        let (Some(r), Some(c)) = (spec.rows, spec.cols) else {
            return Err(Error::Config("kernel csv needs `rows` and `cols`".into()));
        };
        for (i, row) in read_csv_rows(base, rel)?.into_iter().enumerate() {
            if row.len() != 1 + r * c {
                return Err(Error::Config(format!("{rel} row {}: expected {} columns", i + 1, 1 + r * c)));
            }
            nodes.push((row[0], DMatrix::from_row_slice(r, c, &row[1..])));
        }
    }
    if nodes.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Config("kernel nodes must be strictly increasing".into()));
    }
    Ok(KernelTable { nodes })
}

fn kernel_to(t: &KernelTable) -> KernelSpec {
    KernelSpec {
        nodes: t.nodes.iter().map(|(x, m)| MatrixNode { x: *x, matrix: m.into() }).collect(),
        csv: None,
        rows: None,
        cols: None,
    }
}

fn velocity_from(spec: &VelocitySpec, kind: FieldKind, base: &Path) -> Result<VelocityField> {
    let (profile, horizon) = match spec {
        VelocitySpec::Constant { value } => (Profile::Constant { value: *value }, None),
        VelocitySpec::Affine { a, b, horizon } => (Profile::Affine { a: *a, b: *b }, *horizon),
        VelocitySpec::Exponential { a, b, horizon } => (Profile::Exponential { a: *a, b: *b }, *horizon),
        VelocitySpec::ReciprocalAffine { a, b, horizon } => (Profile::ReciprocalAffine { a: *a, b: *b }, *horizon),
        VelocitySpec::Tabulated { points } => (Profile::Tabulated { points: points.clone() }, None),
        VelocitySpec::Csv { path } => (
            Profile::Tabulated {
                points: read_pairs(base, path)?,
            },
            None,
        ),
    };
    VelocityField::new(kind, profile, horizon)
}

fn velocity_to(v: &VelocityField) -> VelocitySpec {
    let horizon = v.horizon;
    match &v.profile {
        Profile::Constant { value } => VelocitySpec::Constant { value: *value },
        Profile::Affine { a, b } => VelocitySpec::Affine { a: *a, b: *b, horizon },
        Profile::Exponential { a, b } => VelocitySpec::Exponential { a: *a, b: *b, horizon },
        Profile::ReciprocalAffine { a, b } => VelocitySpec::ReciprocalAffine { a: *a, b: *b, horizon },
        Profile::Tabulated { points } => VelocitySpec::Tabulated { points: points.clone() },
    }
}

impl ProblemConfig {
    /// Parse JSON text; errors carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ProblemConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
        if cfg.schema_version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {CONFIG_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Build the problem; CSV paths are resolved against `base`.
    pub fn to_problem(&self, base: &Path) -> Result<TransportProblem> {
        let graph = build_graph(&self.graph)?;
        let ids = graph.edge_ids();
        if let Some(extra) = self.velocities.keys().find(|k| !ids.contains(k)) {
            return Err(Error::Config(format!("velocities.{extra}: no such edge")));
        }
        let field = |id: &str, kind| -> Result<VelocityField> {
            let spec = self
                .velocities
                .get(id)
                .ok_or_else(|| Error::Config(format!("velocities: missing edge `{id}`")))?;
            velocity_from(spec, kind, base).map_err(|e| field_err(&format!("velocities.{id}"), e.with_edge(id)))
        };
        let ext = graph
            .external
            .iter()
            .map(|e| field(&e.id, FieldKind::External))
            .collect::<Result<Vec<_>>>()?;
        let int = graph
            .internal
            .iter()
            .map(|e| field(&e.id, FieldKind::Internal))
            .collect::<Result<Vec<_>>>()?;
        let qe = similarity_from(&self.similarity.external).map_err(|e| field_err("similarity.external", e))?;
        let qi = similarity_from(&self.similarity.internal).map_err(|e| field_err("similarity.internal", e))?;
        let b = &self.boundary;
        let mut bd = BoundaryData::matrices(
            b.v0e.to_matrix().map_err(|e| field_err("boundary.v0e", e))?,
            b.v0i.to_matrix().map_err(|e| field_err("boundary.v0i", e))?,
            b.v1i.to_matrix().map_err(|e| field_err("boundary.v1i", e))?,
        );
        if let Some(k) = &b.kernel {
            bd.kernel = Some(Kernel {
                external: k
                    .external
                    .as_ref()
                    .map(|s| kernel_from(s, base))
                    .transpose()
                    .map_err(|e| field_err("boundary.kernel.external", e))?,
                internal: k
                    .internal
                    .as_ref()
                    .map(|s| kernel_from(s, base))
                    .transpose()
                    .map_err(|e| field_err("boundary.kernel.internal", e))?,
            });
        }
        for (i, a) in b.atoms.iter().enumerate() {
            bd.atoms.push(PointMass {
                side: match a.side {
                    SideSpec::External => Side::External,
                    SideSpec::Internal => Side::Internal,
                },
                at: a.at,
                weight: a.weight.to_matrix().map_err(|e| field_err(&format!("boundary.atoms[{i}]"), e))?,
            });
        }
        TransportProblem::new(graph, ext, int, qe, qi, bd, self.p).map_err(|e| field_err("problem", e))
    }

    /// Inline representation of a problem (tables are written in place).
    pub fn from_problem(p: &TransportProblem) -> Self {
        let mut velocities = BTreeMap::new();
        for (e, v) in p.graph.external.iter().zip(&p.external_velocities) {
            velocities.insert(e.id.clone(), velocity_to(v));
        }
        for (e, v) in p.graph.internal.iter().zip(&p.internal_velocities) {
            velocities.insert(e.id.clone(), velocity_to(v));
        }
        let bd = &p.boundary;
        let kernel = bd.kernel.as_ref().map(|k| KernelSection {
            external: k.external.as_ref().map(kernel_to),
            internal: k.internal.as_ref().map(kernel_to),
        });
        ProblemConfig {
            schema_version: CONFIG_VERSION,
            name: None,
            graph: GraphSpec {
                vertices: p.graph.vertices.clone(),
                internal_edges: p.graph.internal.clone(),
                external_edges: p.graph.external.clone(),
                strict: false,
            },
            velocities,
            similarity: SimilaritySection {
                external: similarity_to(&p.q_external),
                internal: similarity_to(&p.q_internal),
            },
            boundary: BoundarySpec {
                v0e: (&bd.v0e).into(),
                v0i: (&bd.v0i).into(),
                v1i: (&bd.v1i).into(),
                kernel,
                atoms: bd
                    .atoms
                    .iter()
                    .map(|a| AtomSpec {
                        side: match a.side {
                            Side::External => SideSpec::External,
                            Side::Internal => SideSpec::Internal,
                        },
                        at: a.at,
                        weight: (&a.weight).into(),
                    })
                    .collect(),
            },
            simulation: None,
            p: p.p,
        }
    }
}

impl SimulationSpec {
    /// Settings with the step defaulting to `min(1/n_s, transit/4)`.
    pub fn settings(&self, problem: &TransportProblem) -> Result<SimulationSettings> {
        let mut s = SimulationSettings::new(self.t_end, 1.0, self.n_s);
        s.dt = match self.dt {
            Some(dt) => dt,
            None => default_dt(problem, self.n_s)?,
        };
        s.r_max = self.r_max;
        s.output_every = self.output_every.unwrap_or(1);
        Ok(s)
    }
}

/// `min(1/n_s, min_j 1/(4 |cbar_j|))`.
pub fn default_dt(problem: &TransportProblem, n_s: usize) -> Result<f64> {
    let maps = crate::coefficients::NormalizationMaps::from_problem(problem)?;
    let sup = maps.cbar_sup();
    let cap = if sup > 0.0 { 0.25 / sup } else { f64::INFINITY };
    Ok((1.0 / n_s.max(1) as f64).min(cap))
}

impl InitialSpec {
    fn sample(&self, edge: &str, len: f64, cells: usize, base: &Path) -> Result<EdgeProfile> {
        Ok(match self {
            InitialSpec::Zero => EdgeProfile::sample(edge, len, cells, |_| 0.0),
            InitialSpec::Constant { value } => EdgeProfile::sample(edge, len, cells, |_| *value),
            InitialSpec::Hat { center, width, height } => EdgeProfile::sample(edge, len, cells, |x| {
                height * (1.0 - (x - center).abs() / width).max(0.0)
            }),
            InitialSpec::Sine {
                modes,
                amplitude,
                offset,
            } => EdgeProfile::sample(edge, len, cells, |x| {
                offset + amplitude * (2.0 * std::f64::consts::PI * modes * x).sin()
            }),
            InitialSpec::Csv { path } => {
                let pts = read_pairs(base, path)?;
                if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::Config(format!("{path}: abscissae must increase")));
                }
                EdgeProfile {
                    edge: edge.to_string(),
                    grid: pts.iter().map(|p| p.0).collect(),
                    values: pts.iter().map(|p| p.1).collect(),
                }
            }
        })
    }
}

/// Default initial data: a unit tent on every edge.
pub fn default_initial() -> InitialSpec {
    InitialSpec::Hat {
        center: 0.5,
        width: 0.25,
        height: 1.0,
    }
}

/// Initial profiles in `edge_ids()` order. External edges are sampled on
/// `[0, ext_len]`; edges without an entry get `fallback`.
pub fn initial_profiles(
    problem: &TransportProblem,
    initial: &BTreeMap<String, InitialSpec>,
    fallback: &InitialSpec,
    n_s: usize,
    ext_len: f64,
    base: &Path,
) -> Result<Vec<EdgeProfile>> {
    let ids = problem.graph.edge_ids();
    if let Some(extra) = initial.keys().find(|k| !ids.contains(k)) {
        return Err(Error::Config(format!("simulation.initial.{extra}: no such edge")));
    }
    let mut out = Vec::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        let spec = initial.get(id).unwrap_or(fallback);
        let (len, cells) = if i < problem.ell() {
            (ext_len, (ext_len * n_s as f64).ceil() as usize)
        } else {
            (1.0, n_s)
        };
        out.push(
            spec.sample(id, len, cells.max(1), base)
                .map_err(|e| field_err(&format!("simulation.initial.{id}"), e))?,
        );
    }
    Ok(out)
}

/// Directory holding the config, used for relative CSV paths.
pub fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}
