//! Path assignments, auxiliary edge weights `w`, and the congestion bound.
//!
//! For a choice of one simple path `γ(x,y)` per ordered pair and a positive
//! edge weight `w`, the congestion on an oriented edge `e` is
//!
//! ```text
//! A(w, e) = (1/m(∅)) (1/m(e)) w(e) Σ_{(x,y): γ(x,y) ∋ e} |γ(x,y)|_w m(x) m(y)
//! ```
//!
//! where `|γ|_w = Σ 1/w` over the path's edges. `λ(G, X) ≥ 1 / max_e A(w, e)`
//! holds for every target metric space `X`.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::graph::WeightedGraph;
use crate::number::{Numbers, Rational, Scalar, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("graph is not a tree (it has a cycle)")]
    NotATree,
    #[error("graph is not a Hamming cube in bitstring labelling")]
    NotAHammingCube,
    #[error("tree-exponential weights need tree-ball level metadata")]
    MissingLevelMetadata,
    #[error("({0}, {1}) is not an edge of the graph")]
    EdgeOutsideSupport(usize, usize),
    #[error("path for ({x}, {y}) is invalid: {reason}")]
    InvalidPath { x: usize, y: usize, reason: String },
    #[error("path assignment covers {got} vertices, graph has {expected}")]
    GraphMismatch { expected: usize, got: usize },
    #[error("edge weight w must be positive on every edge: {0}")]
    InvalidWeight(String),
}

/// One simple oriented path per ordered pair of distinct vertices, stored as
/// vertex sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathAssignment {
    n: usize,
    /// Indexed `x * n + y`; the diagonal is empty.
    paths: Vec<Vec<usize>>,
}

impl PathAssignment {
    /// Validates a full assignment against `graph`.
    pub fn new(graph: &WeightedGraph, paths: Vec<Vec<usize>>) -> Result<Self, PathError> {
        let n = graph.vertex_count();
        if paths.len() != n * n {
            return Err(PathError::GraphMismatch {
                expected: n,
                got: (paths.len() as f64).sqrt() as usize,
            });
        }
        for x in 0..n {
            for y in 0..n {
                let p = &paths[x * n + y];
                let bad = |reason: &str| PathError::InvalidPath {
                    x,
                    y,
                    reason: reason.to_string(),
                };
                if x == y {
                    if !p.is_empty() {
                        return Err(bad("diagonal entries must be empty"));
                    }
                    continue;
                }
                if p.first() != Some(&x) || p.last() != Some(&y) {
                    return Err(bad("wrong endpoints"));
                }
                let mut seen = vec![false; n];
                for &v in p {
                    if v >= n || std::mem::replace(&mut seen[v], true) {
                        return Err(bad("repeated or out-of-range vertex"));
                    }
                }
                if p.windows(2).any(|w| graph.edge_index(w[0], w[1]).is_none()) {
                    return Err(bad("consecutive vertices are not adjacent"));
                }
            }
        }
        Ok(PathAssignment { n, paths })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Vertex sequence of `γ(x, y)`.
    pub fn path(&self, x: usize, y: usize) -> &[usize] {
        &self.paths[x * self.n + y]
    }

    /// Oriented edges of `γ(x, y)` in traversal order.
    pub fn oriented_edges(&self, x: usize, y: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.path(x, y).windows(2).map(|w| (w[0], w[1]))
    }

    /// Replaces `γ(y, x)` by the reversal of `γ(x, y)` for every `x < y`.
    pub fn with_reversed_pairs(&self) -> Self {
        let mut paths = self.paths.clone();
        for x in 0..self.n {
            for y in x + 1..self.n {
                let mut rev = paths[x * self.n + y].clone();
                rev.reverse();
                paths[y * self.n + x] = rev;
            }
        }
        PathAssignment { n: self.n, paths }
    }
}

/// Hop-shortest paths; each vertex is entered from its smallest-index
/// neighbour one BFS layer closer to the source. `γ(y,x)` comes from its own
/// BFS, so it need not be the reversal of `γ(x,y)`.
pub fn bfs_paths(graph: &WeightedGraph) -> PathAssignment {
    let n = graph.vertex_count();
    let mut paths = vec![Vec::new(); n * n];
    for x in 0..n {
        let dist = graph.hop_distances(x);
        let parent: Vec<usize> = (0..n)
            .map(|v| {
                if v == x {
                    return x;
                }
                graph
                    .neighbors(v)
                    .iter()
                    .map(|&(u, _)| u)
                    .find(|&u| dist[u] + 1 == dist[v])
                    .expect("BFS layers are contiguous")
            })
            .collect();
        for y in 0..n {
            if y != x {
                paths[x * n + y] = walk_back(&parent, x, y);
            }
        }
    }
    PathAssignment { n, paths }
}

fn walk_back(parent: &[usize], x: usize, y: usize) -> Vec<usize> {
    let mut p = vec![y];
    let mut cur = y;
    while cur != x {
        cur = parent[cur];
        p.push(cur);
    }
    p.reverse();
    p
}

/// The unique simple path between each pair of a tree.
pub fn tree_geodesic_paths(graph: &WeightedGraph) -> Result<PathAssignment, PathError> {
    if !graph.is_tree() {
        return Err(PathError::NotATree);
    }
    let n = graph.vertex_count();
    let mut paths = vec![Vec::new(); n * n];
    for x in 0..n {
        let mut parent = vec![usize::MAX; n];
        parent[x] = x;
        let mut queue = VecDeque::from([x]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in graph.neighbors(u) {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        for y in 0..n {
            if y != x {
                paths[x * n + y] = walk_back(&parent, x, y);
            }
        }
    }
    Ok(PathAssignment { n, paths })
}

/// Dimension of `graph` if it is a Hamming cube labelled by bitstring value.
pub fn hamming_dimension(graph: &WeightedGraph) -> Option<usize> {
    let size = graph.vertex_count();
    if !size.is_power_of_two() {
        return None;
    }
    let dim = size.trailing_zeros() as usize;
    for x in 0..size {
        let nbrs = graph.neighbors(x);
        if nbrs.len() != dim {
            return None;
        }
        if nbrs.iter().any(|&(y, _)| (x ^ y).count_ones() != 1) {
            return None;
        }
    }
    Some(dim)
}

/// Bit-fixing paths: flip the differing bits of `x` and `y` one at a time,
/// lowest bit position first.
pub fn hamming_bitfix_paths(graph: &WeightedGraph) -> Result<PathAssignment, PathError> {
    let dim = hamming_dimension(graph).ok_or(PathError::NotAHammingCube)?;
    let n = graph.vertex_count();
    let mut paths = vec![Vec::new(); n * n];
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let mut cur = x;
            let mut p = vec![x];
            for bit in 0..dim {
                if (cur ^ y) & (1 << bit) != 0 {
                    cur ^= 1 << bit;
                    p.push(cur);
                }
            }
            paths[x * n + y] = p;
        }
    }
    Ok(PathAssignment { n, paths })
}

/// Strictly positive weight per edge, applied to both orientations.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeightW {
    values: Numbers,
}

impl EdgeWeightW {
    /// `w ≡ 1`.
    pub fn uniform(graph: &WeightedGraph) -> Self {
        EdgeWeightW {
            values: Numbers::from_values(vec![Value::from(1); graph.edge_count()]),
        }
    }

    /// One value per edge, in the graph's edge order.
    pub fn from_values(graph: &WeightedGraph, values: Vec<Value>) -> Result<Self, PathError> {
        if values.len() != graph.edge_count() {
            return Err(PathError::InvalidWeight(format!(
                "expected {} values, got {}",
                graph.edge_count(),
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_positive() || !v.is_finite())
        {
            let e = graph.edges()[i];
            return Err(PathError::InvalidWeight(format!("w({}, {}) = {v}", e.u, e.v)));
        }
        Ok(EdgeWeightW {
            values: Numbers::from_values(values),
        })
    }

    /// Values keyed by endpoints; every graph edge must appear exactly once.
    pub fn from_edge_list(
        graph: &WeightedGraph,
        entries: impl IntoIterator<Item = (usize, usize, Value)>,
    ) -> Result<Self, PathError> {
        let mut values: Vec<Option<Value>> = vec![None; graph.edge_count()];
        for (u, v, w) in entries {
            let idx = graph
                .edge_index(u, v)
                .ok_or(PathError::EdgeOutsideSupport(u, v))?;
            if values[idx].replace(w).is_some() {
                return Err(PathError::InvalidWeight(format!("edge ({u}, {v}) given twice")));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    let e = graph.edges()[i];
                    PathError::InvalidWeight(format!("missing weight for edge ({}, {})", e.u, e.v))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_values(graph, values)
    }

    /// On a tree ball, the edge between levels `k-1` and `k` gets `(d-1)^k`.
    pub fn tree_exponential(graph: &WeightedGraph) -> Result<Self, PathError> {
        let levels = graph.levels().ok_or(PathError::MissingLevelMetadata)?;
        let center = levels
            .iter()
            .position(|&l| l == 0)
            .ok_or(PathError::MissingLevelMetadata)?;
        let base = graph.degree(center) as i64 - 1;
        let values = graph
            .edges()
            .iter()
            .map(|e| {
                let k = levels[e.u].max(levels[e.v]) as u32;
                Value::from(base.pow(k))
            })
            .collect();
        Self::from_values(graph, values)
    }

    pub fn get(&self, edge: usize) -> Value {
        self.values.get(edge)
    }

    pub fn values(&self) -> &Numbers {
        &self.values
    }

    pub fn is_exact(&self) -> bool {
        self.values.is_exact()
    }

    /// `w` multiplied by `c`.
    pub fn scaled(&self, c: &Value) -> Self {
        EdgeWeightW {
            values: Numbers::from_values(
                self.values
                    .values()
                    .iter()
                    .map(|v| crate::graph::mul_values(v, c))
                    .collect(),
            ),
        }
    }
}

/// `|γ|_w = Σ 1/w(e)` over the edges of the vertex sequence `path`.
pub fn gamma_length_w(graph: &WeightedGraph, path: &[usize], w: &EdgeWeightW) -> Result<Value, PathError> {
    if w.is_exact() {
        gamma_length::<Rational>(graph, path, &w.values.to_scalars()).map(Scalar::into_value)
    } else {
        gamma_length::<f64>(graph, path, &w.values.to_scalars()).map(Scalar::into_value)
    }
}

fn gamma_length<S: Scalar>(graph: &WeightedGraph, path: &[usize], w: &[S]) -> Result<S, PathError> {
    if path.len() < 2 {
        return Err(PathError::InvalidPath {
            x: path.first().copied().unwrap_or(0),
            y: path.last().copied().unwrap_or(0),
            reason: "path has no edges".into(),
        });
    }
    path.windows(2).try_fold(S::zero(), |acc, pair| {
        let e = graph
            .edge_index(pair[0], pair[1])
            .ok_or(PathError::EdgeOutsideSupport(pair[0], pair[1]))?;
        Ok(acc + S::one() / w[e].clone())
    })
}

/// Result of evaluating the congestion over every oriented edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Congestion {
    /// `A(w) = max_e A(w, e)`.
    pub value: Value,
    /// First oriented edge (in [`WeightedGraph::oriented_edges`] order)
    /// attaining the maximum.
    pub argmax_edge: (usize, usize),
    /// `A(w, e)` per oriented edge, in [`WeightedGraph::oriented_edges`] order.
    pub profile: Vec<((usize, usize), Value)>,
}

impl Congestion {
    /// `1 / A(w)`.
    pub fn lower_bound(&self) -> Value {
        self.value.recip()
    }
}

/// Congestion of `paths` under `w`. A path contributes to oriented edge
/// `(u, v)` only when it traverses `u → v`.
pub fn congestion(graph: &WeightedGraph, w: &EdgeWeightW, paths: &PathAssignment) -> Result<Congestion, PathError> {
    if paths.vertex_count() != graph.vertex_count() {
        return Err(PathError::GraphMismatch {
            expected: graph.vertex_count(),
            got: paths.vertex_count(),
        });
    }
    if w.values.len() != graph.edge_count() {
        return Err(PathError::InvalidWeight("w does not match the graph's edge set".into()));
    }
    if graph.is_exact() && w.is_exact() {
        congestion_in::<Rational>(graph, &w.values.to_scalars(), paths)
    } else {
        congestion_in::<f64>(graph, &w.values.to_scalars(), paths)
    }
}

fn congestion_in<S: Scalar>(graph: &WeightedGraph, w: &[S], paths: &PathAssignment) -> Result<Congestion, PathError> {
    let n = graph.vertex_count();
    let m = graph.edge_weights_as::<S>();
    let vw = graph.vertex_weights_as::<S>();
    let total = graph.total_weight_as::<S>();
    let mut load = vec![S::zero(); 2 * graph.edge_count()];

    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let path = paths.path(x, y);
            let len = gamma_length(graph, path, w)?;
            let contribution = len * vw[x].clone() * vw[y].clone();
            for pair in path.windows(2) {
                let idx = graph
                    .oriented_index(pair[0], pair[1])
                    .ok_or(PathError::EdgeOutsideSupport(pair[0], pair[1]))?;
                load[idx] = load[idx].clone() + contribution.clone();
            }
        }
    }

    let mut profile = Vec::with_capacity(load.len());
    let mut best: Option<(S, (usize, usize))> = None;
    for (idx, (a, b)) in graph.oriented_edges().enumerate() {
        let e = idx / 2;
        let value = load[idx].clone() * w[e].clone() / (total.clone() * m[e].clone());
        if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
            best = Some((value.clone(), (a, b)));
        }
        profile.push(((a, b), value.into_value()));
    }
    let (value, argmax_edge) = best.expect("connected graphs have edges");
    Ok(Congestion {
        value: value.into_value(),
        argmax_edge,
        profile,
    })
}

/// `1 / A(w)`, a lower bound on `λ(G, X)` for every metric space `X`.
pub fn path_method_lower_bound(
    graph: &WeightedGraph,
    w: &EdgeWeightW,
    paths: &PathAssignment,
) -> Result<Value, PathError> {
    congestion(graph, w, paths).map(|c| c.lower_bound())
}
