//! Finite metric graphs with internal ([0,1]) and external (R+) edges.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalEdge {
    pub id: String,
    pub endpoint0: String,
    pub endpoint1: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalEdge {
    pub id: String,
    pub endpoint0: String,
}

/// Structured graph description as it appears in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub internal_edges: Vec<InternalEdge>,
    #[serde(default)]
    pub external_edges: Vec<ExternalEdge>,
    #[serde(default)]
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    pub vertices: Vec<String>,
    pub internal: Vec<InternalEdge>,
    pub external: Vec<ExternalEdge>,
    /// Strict-mode findings that were not promoted to errors.
    pub warnings: Vec<String>,
}

/// Which endpoints of an edge touch which vertex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Incidence {
    Internal { endpoint0: String, endpoint1: String },
    External { endpoint0: String },
}

pub fn build_graph(spec: &GraphSpec) -> Result<MetricGraph> {
    let mut seen_v = HashSet::new();
    for v in &spec.vertices {
        if !seen_v.insert(v.as_str()) {
            return Err(Error::DuplicateVertexId(v.clone()));
        }
    }
    let mut seen_e = HashSet::new();
    let check_vertex = |edge: &str, v: &str| -> Result<()> {
        if seen_v.contains(v) {
            Ok(())
        } else {
            Err(Error::DanglingEndpoint {
                edge: edge.to_string(),
                vertex: v.to_string(),
            })
        }
    };
    for e in &spec.external_edges {
        if !seen_e.insert(e.id.as_str()) {
            return Err(Error::DuplicateEdgeId(e.id.clone()));
        }
        check_vertex(&e.id, &e.endpoint0)?;
    }
    for e in &spec.internal_edges {
        if !seen_e.insert(e.id.as_str()) {
            return Err(Error::DuplicateEdgeId(e.id.clone()));
        }
        check_vertex(&e.id, &e.endpoint0)?;
        check_vertex(&e.id, &e.endpoint1)?;
    }
    if spec.internal_edges.is_empty() && spec.external_edges.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let mut g = MetricGraph {
        vertices: spec.vertices.clone(),
        internal: spec.internal_edges.clone(),
        external: spec.external_edges.clone(),
        warnings: Vec::new(),
    };

    if !g.is_connected() {
        if spec.strict {
            return Err(Error::NotConnected);
        }
        g.warnings.push("graph is not connected".into());
    }
    for v in &g.vertices {
        if g.degree(v) == 1 {
            if spec.strict {
                return Err(Error::DegreeOne(v.clone()));
            }
            g.warnings.push(format!("vertex `{v}` has degree 1"));
        }
    }
    Ok(g)
}

impl MetricGraph {
    /// Number of external edges.
    pub fn ell(&self) -> usize {
        self.external.len()
    }

    /// Number of internal edges.
    pub fn m(&self) -> usize {
        self.internal.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Edge ids, external edges first, each block in declaration order.
    pub fn edge_ids(&self) -> Vec<String> {
        self.external
            .iter()
            .map(|e| e.id.clone())
            .chain(self.internal.iter().map(|e| e.id.clone()))
            .collect()
    }

    /// Number of edge endpoints attached to `v`; a self-loop counts twice.
    pub fn degree(&self, v: &str) -> usize {
        let ext = self.external.iter().filter(|e| e.endpoint0 == v).count();
        let int: usize = self
            .internal
            .iter()
            .map(|e| (e.endpoint0 == v) as usize + (e.endpoint1 == v) as usize)
            .sum();
        ext + int
    }

    pub fn incidence_map(&self) -> BTreeMap<String, Incidence> {
        let mut map = BTreeMap::new();
        for e in &self.external {
            map.insert(
                e.id.clone(),
                Incidence::External {
                    endpoint0: e.endpoint0.clone(),
                },
            );
        }
        for e in &self.internal {
            map.insert(
                e.id.clone(),
                Incidence::Internal {
                    endpoint0: e.endpoint0.clone(),
                    endpoint1: e.endpoint1.clone(),
                },
            );
        }
        map
    }

    fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let index: HashMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for e in &self.internal {
            let a = find(&mut parent, index[e.endpoint0.as_str()]);
            let b = find(&mut parent, index[e.endpoint1.as_str()]);
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        (0..self.vertices.len()).all(|i| find(&mut parent, i) == root)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    TowardEndpoint1,
    TowardEndpoint0,
    TowardInfinity,
    TowardVertex,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowOrientation {
    /// Per edge in `edge_ids()` order.
    pub directions: Vec<(String, Direction)>,
    /// Edges carrying material into each vertex.
    pub incoming: BTreeMap<String, Vec<String>>,
    /// Edges carrying material out of each vertex.
    pub outgoing: BTreeMap<String, Vec<String>>,
}

/// Orient each edge by the sign of its velocity. `signs` follows
/// `edge_ids()` order: external edges first, then internal edges.
pub fn orient_by_flow(graph: &MetricGraph, signs: &[i8]) -> Result<FlowOrientation> {
    let expected = graph.ell() + graph.m();
    if signs.len() != expected {
        return Err(Error::SignCountMismatch {
            expected,
            got: signs.len(),
        });
    }
    if let Some(bad) = signs.iter().find(|s| s.abs() != 1) {
        return Err(Error::Precondition(format!("edge sign must be +1 or -1, got {bad}")));
    }
    let mut incoming: BTreeMap<String, Vec<String>> =
        graph.vertices.iter().map(|v| (v.clone(), Vec::new())).collect();
    let mut outgoing = incoming.clone();
    let mut directions = Vec::with_capacity(expected);

    for (e, &s) in graph.external.iter().zip(signs) {
        let dir = if s > 0 {
            incoming.get_mut(&e.endpoint0).unwrap().push(e.id.clone());
            Direction::TowardVertex
        } else {
            outgoing.get_mut(&e.endpoint0).unwrap().push(e.id.clone());
            Direction::TowardInfinity
        };
        directions.push((e.id.clone(), dir));
    }
    for (e, &s) in graph.internal.iter().zip(&signs[graph.ell()..]) {
        let (from, to, dir) = if s < 0 {
            (&e.endpoint0, &e.endpoint1, Direction::TowardEndpoint1)
        } else {
            (&e.endpoint1, &e.endpoint0, Direction::TowardEndpoint0)
        };
        outgoing.get_mut(from).unwrap().push(e.id.clone());
        incoming.get_mut(to).unwrap().push(e.id.clone());
        directions.push((e.id.clone(), dir));
    }
    Ok(FlowOrientation {
        directions,
        incoming,
        outgoing,
    })
}
