//! Built-in example problems.

use nalgebra::DMatrix;

use crate::coefficients::{FieldKind, Profile, Similarity, VelocityField};
use crate::error::{Error, Result};
use crate::graph::{build_graph, ExternalEdge, GraphSpec, InternalEdge, MetricGraph};
use crate::problem::TransportProblem;
use crate::wellposedness::{BoundaryData, Kernel, KernelTable};

pub const NAMES: [&str; 13] = [
    "mckendrick",
    "loop",
    "loop-variable-q",
    "halfline-interval",
    "sink",
    "loop-graph",
    "pumpkin-kirchhoff",
    "pumpkin-weighted",
    "lasso-a",
    "lasso-b",
    "lasso-c",
    "five-four",
    "star",
];

pub fn names() -> &'static [&'static str] {
    &NAMES
}

/// Example with its default parameters.
pub fn by_name(name: &str) -> Result<TransportProblem> {
    Ok(match name {
        "mckendrick" => mckendrick(),
        "loop" => loop_two_edges(),
        "loop-variable-q" => loop_variable_q(),
        "halfline-interval" => halfline_interval(1.0, 0.5, 0.3, 0.7, 0.2, 1.0)?,
        "sink" => sink(1.0, 2.0, 3.0, 4.0),
        "loop-graph" => loop_graph(2.0, 3.0, 1.0, 0.5),
        "pumpkin-kirchhoff" => pumpkin_kirchhoff(),
        "pumpkin-weighted" => pumpkin_weighted(0.5),
        "lasso-a" => lasso('a', 1.0, 2.0, 1.0, 1.0, 1.0, 1.0)?,
        "lasso-b" => lasso('b', 1.0, 2.0, 1.0, 1.0, 1.0, 1.0)?,
        "lasso-c" => lasso('c', 1.0, 2.0, 1.0, 1.0, 1.0, 1.0)?,
        "five-four" => five_four(),
        "star" => star(2, 3, &[0.5; 6]),
        other => {
            return Err(Error::Config(format!(
                "unknown example `{other}`, expected one of {}",
                NAMES.join(", ")
            )))
        }
    })
}

fn graph(vertices: &[&str], internal: &[(&str, &str, &str)], external: &[(&str, &str)]) -> MetricGraph {
    let spec = GraphSpec {
        vertices: vertices.iter().map(|v| v.to_string()).collect(),
        internal_edges: internal
            .iter()
            .map(|(id, a, b)| InternalEdge {
                id: id.to_string(),
                endpoint0: a.to_string(),
                endpoint1: b.to_string(),
            })
            .collect(),
        external_edges: external
            .iter()
            .map(|(id, v)| ExternalEdge {
                id: id.to_string(),
                endpoint0: v.to_string(),
            })
            .collect(),
        strict: false,
    };
    build_graph(&spec).expect("catalog graphs are well formed")
}

fn mat(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

fn ext(v: f64) -> VelocityField {
    VelocityField::constant(FieldKind::External, v)
}

fn int(v: f64) -> VelocityField {
    VelocityField::constant(FieldKind::Internal, v)
}

fn build(
    g: MetricGraph,
    ev: Vec<VelocityField>,
    iv: Vec<VelocityField>,
    boundary: BoundaryData,
    q_internal: Similarity,
) -> Result<TransportProblem> {
    TransportProblem::new(g, ev, iv, Similarity::Identity, q_internal, boundary, 2.0)
}

/// Age-structured population on one edge: the newborn trace is a weighted
/// integral of the density.
pub fn mckendrick() -> TransportProblem {
    let g = graph(&["v"], &[("e1", "v", "v")], &[]);
    let nodes = (0..=64)
        .map(|i| {
            let s = i as f64 / 64.0;
            (s, mat(1, 1, &[2.0 * s * (1.0 - s)]))
        })
        .collect();
    let mut bd = BoundaryData::matrices(DMatrix::zeros(1, 0), mat(1, 1, &[0.0]), mat(1, 1, &[-1.0]));
    bd.kernel = Some(Kernel {
        external: None,
        internal: Some(KernelTable { nodes }),
    });
    build(g, vec![], vec![int(1.0)], bd, Similarity::Identity).unwrap()
}

/// Two periodic edges with opposite velocities.
pub fn loop_two_edges() -> TransportProblem {
    let g = graph(&["v"], &[("e1", "v", "v"), ("e2", "v", "v")], &[]);
    let lam1 = VelocityField::new(FieldKind::Internal, Profile::Affine { a: 1.0, b: 1.0 }, None).unwrap();
    let id = DMatrix::identity(2, 2);
    let bd = BoundaryData::matrices(DMatrix::zeros(2, 0), id.clone(), id);
    build(g, vec![], vec![lam1, int(-2.0)], bd, Similarity::Identity).unwrap()
}

/// Same as `loop_two_edges` with the similarity `q(s) = A + s B`.
pub fn loop_variable_q() -> TransportProblem {
    let p = loop_two_edges();
    let q = Similarity::Affine {
        a: mat(2, 2, &[2.0, -1.0, 1.0, 0.0]),
        b: mat(2, 2, &[-1.0, 1.0, -1.0, 1.0]),
    };
    build(p.graph, vec![], p.internal_velocities, p.boundary, q).unwrap()
}

/// Half-line with velocity -1 attached to an interval with velocity +1.
/// Columns: `V0e = (alpha, beta)`, `V0i = (a, b)`, `V1i = (c, d)`.
pub fn halfline_interval(alpha: f64, beta: f64, a: f64, b: f64, c: f64, d: f64) -> Result<TransportProblem> {
    halfline_general(-1.0, 1.0, &[alpha, beta], &[a, b], &[c, d])
}

/// Half-line `h` at `v` and interval `i` from `w` to `v` with constant
/// velocities; each slice is one boundary column.
pub fn halfline_general(
    lambda_e: f64,
    lambda_i: f64,
    v0e: &[f64],
    v0i: &[f64],
    v1i: &[f64],
) -> Result<TransportProblem> {
    let g = graph(&["v", "w"], &[("i", "w", "v")], &[("h", "v")]);
    let n = v0e.len();
    let bd = BoundaryData::matrices(mat(n, 1, v0e), mat(v0i.len(), 1, v0i), mat(v1i.len(), 1, v1i));
    build(g, vec![ext(lambda_e)], vec![int(lambda_i)], bd, Similarity::Identity)
}

fn two_vertex_pair() -> MetricGraph {
    graph(&["v1", "v2"], &[("e1", "v1", "v2"), ("e2", "v1", "v2")], &[])
}

/// Two edges draining into `v2`: `a f1(0) + b f2(0) = 0`,
/// `gamma f1(1) + delta f2(1) = 0`.
pub fn sink(a: f64, b: f64, gamma: f64, delta: f64) -> TransportProblem {
    let bd = BoundaryData::matrices(
        DMatrix::zeros(2, 0),
        mat(2, 2, &[a, b, 0.0, 0.0]),
        mat(2, 2, &[0.0, 0.0, gamma, delta]),
    );
    build(two_vertex_pair(), vec![], vec![int(-1.0), int(-1.0)], bd, Similarity::Identity).unwrap()
}

/// Sink graph with the diagonal conditions `a f1(0) = 0`, `d f2(0) = 0`.
pub fn sink_degenerate(a: f64, d: f64) -> TransportProblem {
    let bd = BoundaryData::matrices(DMatrix::zeros(2, 0), mat(2, 2, &[a, 0.0, 0.0, d]), DMatrix::zeros(2, 2));
    build(two_vertex_pair(), vec![], vec![int(-1.0), int(-1.0)], bd, Similarity::Identity).unwrap()
}

/// Cycle of two unit-speed edges: `a f1(0) = beta f2(1)`,
/// `d f2(0) = gamma f1(1)`.
pub fn loop_graph(a: f64, d: f64, beta: f64, gamma: f64) -> TransportProblem {
    let g = graph(&["v1", "v2"], &[("e1", "v1", "v2"), ("e2", "v2", "v1")], &[]);
    let bd = BoundaryData::matrices(
        DMatrix::zeros(2, 0),
        mat(2, 2, &[a, 0.0, 0.0, d]),
        mat(2, 2, &[0.0, beta, gamma, 0.0]),
    );
    build(g, vec![], vec![int(-1.0), int(-1.0)], bd, Similarity::Identity).unwrap()
}

fn pumpkin(v0: DMatrix<f64>, v1: DMatrix<f64>) -> TransportProblem {
    let g = graph(
        &["v1", "v2"],
        &[("e1", "v1", "v2"), ("e2", "v1", "v2"), ("e3", "v2", "v1")],
        &[],
    );
    let bd = BoundaryData::matrices(DMatrix::zeros(3, 0), v0, v1);
    build(g, vec![], vec![int(-1.0); 3], bd, Similarity::Identity).unwrap()
}

/// Kirchhoff conditions `u1(0) + u2(0) = u3(1)`, `u3(0) = u1(1) + u2(1)`
/// plus an empty third row.
pub fn pumpkin_kirchhoff() -> TransportProblem {
    pumpkin(
        mat(3, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]),
        mat(3, 3, &[0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
    )
}

/// Mass-conserving split: `u1(0) = alpha u3(1)`, `u2(0) = (1 - alpha) u3(1)`,
/// `u3(0) = u1(1) + u2(1)`.
pub fn pumpkin_weighted(alpha: f64) -> TransportProblem {
    pumpkin(
        DMatrix::identity(3, 3),
        mat(3, 3, &[0.0, 0.0, alpha, 0.0, 0.0, 1.0 - alpha, 1.0, 1.0, 0.0]),
    )
}

/// Two-edge cycle with two half-lines. Case `a`: both half-lines carry
/// material in, case `b`: one in, one out, case `c`: both out.
pub fn lasso(case: char, a: f64, d: f64, beta: f64, gamma: f64, lambda: f64, mu: f64) -> Result<TransportProblem> {
    let g = graph(
        &["v1", "v2"],
        &[("e1", "v1", "v2"), ("e2", "v2", "v1")],
        &[("h1", "v1"), ("h2", "v2")],
    );
    let (signs, v0e): ([f64; 2], DMatrix<f64>) = match case {
        'a' => ([1.0, 1.0], mat(2, 2, &[lambda, 0.0, 0.0, mu])),
        'b' => ([1.0, -1.0], mat(3, 2, &[lambda, 0.0, 0.0, 0.0, 0.0, mu])),
        'c' => ([-1.0, -1.0], mat(4, 2, &[0.0, 0.0, 0.0, 0.0, lambda, 0.0, 0.0, mu])),
        other => return Err(Error::Config(format!("unknown lasso case `{other}`"))),
    };
    let q = v0e.nrows();
    let mut v0i = DMatrix::zeros(q, 2);
    v0i[(0, 0)] = a;
    v0i[(1, 1)] = d;
    let mut v1i = DMatrix::zeros(q, 2);
    v1i[(0, 1)] = beta;
    v1i[(1, 0)] = gamma;
    let bd = BoundaryData::matrices(v0e, v0i, v1i);
    build(g, vec![ext(signs[0]), ext(signs[1])], vec![int(-1.0), int(-1.0)], bd, Similarity::Identity)
}

/// Five internal and four external edges; the external pair 1, 2 carries
/// material in, the pair 3, 4 carries it out.
pub fn five_four() -> TransportProblem {
    let (a1, a2, b1, b2, g1, g2, d1, d2, e1, e2) = (0.5, 0.5, 1.0, 1.0, 0.3, 0.7, 0.4, 0.6, 1.0, 1.0);
    let g = graph(
        &["v1", "v2", "v3", "v4"],
        &[
            ("e1", "v1", "v2"),
            ("e2", "v2", "v3"),
            ("e3", "v3", "v4"),
            ("e4", "v4", "v1"),
            ("e5", "v2", "v4"),
        ],
        &[("x1", "v1"), ("x2", "v3"), ("x3", "v3"), ("x4", "v4")],
    );
    let mut v0i = DMatrix::zeros(7, 5);
    v0i.view_mut((0, 0), (5, 5)).fill_with_identity();
    #[rustfmt::skip]
    let v1i = mat(7, 5, &[
        0.0, 0.0, 0.0, 1.0, 0.0,
        a1, 0.0, 0.0, 0.0, 0.0,
        0.0, b1, 0.0, 0.0, 0.0,
        0.0, 0.0, g1, 0.0, d1,
        a2, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, g2, 0.0, d2,
        0.0, b2, 0.0, 0.0, 0.0,
    ]);
    #[rustfmt::skip]
    let v0e = mat(7, 4, &[
        -1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0,
        0.0, -e1, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0,
        0.0, -e2, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    ]);
    let bd = BoundaryData::matrices(v0e, v0i, v1i);
    build(
        g,
        vec![ext(1.0), ext(1.0), ext(-1.0), ext(-1.0)],
        vec![int(-1.0); 5],
        bd,
        Similarity::Identity,
    )
    .unwrap()
}

/// One vertex with `q_out` outgoing and `n_in` incoming half-lines:
/// every outgoing trace is a combination of the incoming ones,
/// `V0e = (I | -alpha)` with `alpha` given row-major `q_out x n_in`.
pub fn star(q_out: usize, n_in: usize, alpha: &[f64]) -> TransportProblem {
    assert_eq!(alpha.len(), q_out * n_in, "alpha must be q_out x n_in");
    let ids: Vec<String> = (0..q_out + n_in).map(|k| format!("h{}", k + 1)).collect();
    let edges: Vec<(&str, &str)> = ids.iter().map(|id| (id.as_str(), "v")).collect();
    let g = graph(&["v"], &[], &edges);
    let mut v0e = DMatrix::zeros(q_out, q_out + n_in);
    v0e.view_mut((0, 0), (q_out, q_out)).fill_with_identity();
    for r in 0..q_out {
        for c in 0..n_in {
            v0e[(r, q_out + c)] = -alpha[r * n_in + c];
        }
    }
    let velocities = (0..q_out).map(|_| ext(-1.0)).chain((0..n_in).map(|_| ext(1.0))).collect();
    let bd = BoundaryData::matrices(v0e, DMatrix::zeros(q_out, 0), DMatrix::zeros(q_out, 0));
    build(g, velocities, vec![], bd, Similarity::Identity).unwrap()
}

/// Single self-loop with `f(0) = f(1)` and constant velocity `c`.
pub fn periodic_edge(c: f64) -> TransportProblem {
    let g = graph(&["v"], &[("e1", "v", "v")], &[]);
    let one = DMatrix::identity(1, 1);
    let bd = BoundaryData::matrices(DMatrix::zeros(1, 0), one.clone(), one);
    build(g, vec![], vec![int(c)], bd, Similarity::Identity).unwrap()
}
