//! Weighted simple connected graphs.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::number::{Numbers, Rational, Scalar, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph needs at least 2 vertices, got {0}")]
    RejectTooSmall(usize),
    #[error("edge ({u}, {v}) references a vertex outside 0..{n}")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    RejectLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    RejectDuplicateEdge(usize, usize),
    #[error("edge {{{u}, {v}}} has non-positive weight {weight}")]
    RejectNonpositiveWeight { u: usize, v: usize, weight: String },
    #[error("graph is disconnected: vertex {0} unreachable from vertex 0")]
    RejectDisconnected(usize),
    #[error("{what} would have {size} vertices, above the size cap {cap}")]
    SizeCapExceeded { what: String, size: u128, cap: usize },
    #[error("pairing model failed to produce a simple connected graph after {0} attempts")]
    PairingFailed(usize),
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
}

/// An unordered edge stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        Edge {
            u: a.min(b),
            v: a.max(b),
        }
    }
}

/// Which generator produced a graph; carried for reports and strategy checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    Hamming { n: usize },
    TreeBall { d: usize, r: usize },
    Path { n: usize },
    Cycle { n: usize },
    Complete { n: usize },
    RandomRegular { n: usize, d: usize, seed: u64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Hamming { .. } => "hamming",
            Family::TreeBall { .. } => "tree",
            Family::Path { .. } => "path",
            Family::Cycle { .. } => "cycle",
            Family::Complete { .. } => "complete",
            Family::RandomRegular { .. } => "regular",
        }
    }

    pub fn parameters(&self) -> Vec<(&'static str, String)> {
        match *self {
            Family::Hamming { n } => vec![("n", n.to_string())],
            Family::TreeBall { d, r } => vec![("d", d.to_string()), ("r", r.to_string())],
            Family::Path { n } | Family::Cycle { n } | Family::Complete { n } => {
                vec![("n", n.to_string())]
            }
            Family::RandomRegular { n, d, seed } => vec![
                ("n", n.to_string()),
                ("d", d.to_string()),
                ("seed", seed.to_string()),
            ],
        }
    }
}

/// A finite simple connected graph with a positive symmetric edge weight.
///
/// Immutable after construction. Vertex weights `m(x)` and the total weight
/// `m(∅) = Σ_x m(x)` are computed eagerly.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    weights: Numbers,
    /// Sorted by neighbour index: `(neighbour, edge index)`.
    adjacency: Vec<Vec<(usize, usize)>>,
    vertex_weights: Numbers,
    total_weight: Value,
    levels: Option<Vec<usize>>,
    family: Option<Family>,
}

impl WeightedGraph {
    /// Validates and builds a graph from `(u, v, weight)` triples.
    pub fn new(
        n: usize,
        weighted_edges: impl IntoIterator<Item = (usize, usize, Value)>,
    ) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::RejectTooSmall(n));
        }
        let mut edges = Vec::new();
        let mut weights = Vec::new();
        let mut seen = HashSet::new();
        for (u, v, w) in weighted_edges {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange { u, v, n });
            }
            if u == v {
                return Err(GraphError::RejectLoop(u));
            }
            let e = Edge::new(u, v);
            if !seen.insert(e) {
                return Err(GraphError::RejectDuplicateEdge(e.u, e.v));
            }
            if !w.is_positive() || !w.is_finite() {
                return Err(GraphError::RejectNonpositiveWeight {
                    u: e.u,
                    v: e.v,
                    weight: w.to_string(),
                });
            }
            edges.push(e);
            weights.push(w);
        }

        let mut adjacency = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.u].push((e.v, i));
            adjacency[e.v].push((e.u, i));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        let dist = bfs_hops(&adjacency, 0);
        if let Some(unreached) = dist.iter().position(Option::is_none) {
            return Err(GraphError::RejectDisconnected(unreached));
        }

        let weights = Numbers::from_values(weights);
        let (vertex_weights, total_weight) = match &weights {
            Numbers::Exact(w) => {
                let (vw, total) = vertex_sums::<Rational>(n, &edges, w);
                (Numbers::Exact(vw), Value::Exact(total))
            }
            Numbers::Float(w) => {
                let (vw, total) = vertex_sums::<f64>(n, &edges, w);
                (Numbers::Float(vw), Value::Approx(total))
            }
        };

        Ok(WeightedGraph {
            n,
            edges,
            weights,
            adjacency,
            vertex_weights,
            total_weight,
            levels: None,
            family: None,
        })
    }

    /// Uniform weight 1 on every listed edge.
    pub fn uniform(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        Self::new(n, edges.into_iter().map(|(u, v)| (u, v, Value::from(1))))
    }

    pub(crate) fn with_family(mut self, family: Family) -> Self {
        self.family = Some(family);
        self
    }

    pub(crate) fn with_levels(mut self, levels: Vec<usize>) -> Self {
        debug_assert_eq!(levels.len(), self.n);
        self.levels = Some(levels);
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_weights(&self) -> &Numbers {
        &self.weights
    }

    pub fn edge_weight(&self, edge: usize) -> Value {
        self.weights.get(edge)
    }

    pub fn vertex_weights(&self) -> &Numbers {
        &self.vertex_weights
    }

    pub fn vertex_weight(&self, x: usize) -> Value {
        self.vertex_weights.get(x)
    }

    /// `m(∅) = Σ_x m(x)`.
    pub fn total_weight(&self) -> &Value {
        &self.total_weight
    }

    pub fn is_exact(&self) -> bool {
        self.weights.is_exact()
    }

    /// `(neighbour, edge index)` pairs sorted by neighbour.
    pub fn neighbors(&self, x: usize) -> &[(usize, usize)] {
        &self.adjacency[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    /// Index of the edge `{a, b}`, if present.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let list = self.adjacency.get(a)?;
        list.binary_search_by_key(&b, |&(y, _)| y)
            .ok()
            .map(|pos| list[pos].1)
    }

    /// Both orientations of every edge: `(u, v)` then `(v, u)` per edge.
    pub fn oriented_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().flat_map(|e| [(e.u, e.v), (e.v, e.u)])
    }

    /// Position of the oriented edge `(a, b)` in [`Self::oriented_edges`].
    pub fn oriented_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index(a, b)
            .map(|e| 2 * e + usize::from(a > b))
    }

    /// Distance from the generating center, for tree balls.
    pub fn levels(&self) -> Option<&[usize]> {
        self.levels.as_deref()
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.n
    }

    /// Hop distances from `source`.
    pub fn hop_distances(&self, source: usize) -> Vec<usize> {
        bfs_hops(&self.adjacency, source)
            .into_iter()
            .map(|d| d.expect("graph is connected"))
            .collect()
    }

    /// Edge weights in scalar type `S`.
    pub fn edge_weights_as<S: Scalar>(&self) -> Vec<S> {
        self.weights.to_scalars()
    }

    pub fn vertex_weights_as<S: Scalar>(&self) -> Vec<S> {
        self.vertex_weights.to_scalars()
    }

    pub fn total_weight_as<S: Scalar>(&self) -> S {
        self.total_weight.to_scalar()
    }

    /// Multiplies every edge weight by `c`.
    pub fn scaled(&self, c: &Value) -> Self {
        let triples: Vec<_> = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.u, e.v, mul_values(&self.weights.get(i), c)))
            .collect();
        let mut g = WeightedGraph::new(self.n, triples).expect("scaling preserves validity");
        g.levels = self.levels.clone();
        g.family = self.family.clone();
        g
    }
}

pub(crate) fn mul_values(a: &Value, b: &Value) -> Value {
    match (a, b) {
        (Value::Exact(x), Value::Exact(y)) => Value::Exact(x * y),
        _ => Value::Approx(a.to_f64() * b.to_f64()),
    }
}

fn vertex_sums<S: Scalar>(n: usize, edges: &[Edge], w: &[S]) -> (Vec<S>, S) {
    let mut vw = vec![S::zero(); n];
    for (e, we) in edges.iter().zip(w) {
        vw[e.u] = vw[e.u].clone() + we.clone();
        vw[e.v] = vw[e.v].clone() + we.clone();
    }
    let total = vw.iter().cloned().fold(S::zero(), |a, b| a + b);
    (vw, total)
}

fn bfs_hops(adjacency: &[Vec<(usize, usize)>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adjacency.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(x) = queue.pop_front() {
        let dx = dist[x].unwrap();
        for &(y, _) in &adjacency[x] {
            if dist[y].is_none() {
                dist[y] = Some(dx + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::ratio;

    #[test]
    fn single_edge() {
        let g = WeightedGraph::uniform(2, [(0, 1)]).unwrap();
        assert_eq!(g.vertex_weight(0), Value::from(1));
        assert_eq!(g.vertex_weight(1), Value::from(1));
        assert_eq!(*g.total_weight(), Value::from(2));
    }

    #[test]
    fn path_of_two_edges() {
        let g = WeightedGraph::uniform(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.vertex_weight(1), Value::from(2));
        assert_eq!(*g.total_weight(), Value::from(4));
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert_eq!(
            WeightedGraph::uniform(3, [(0, 1)]).unwrap_err(),
            GraphError::RejectDisconnected(2)
        );
        assert_eq!(
            WeightedGraph::uniform(1, []).unwrap_err(),
            GraphError::RejectTooSmall(1)
        );
        assert_eq!(
            WeightedGraph::uniform(2, [(1, 1)]).unwrap_err(),
            GraphError::RejectLoop(1)
        );
        assert_eq!(
            WeightedGraph::uniform(2, [(0, 1), (1, 0)]).unwrap_err(),
            GraphError::RejectDuplicateEdge(0, 1)
        );
        assert!(matches!(
            WeightedGraph::new(2, [(0, 1, Value::from(0))]),
            Err(GraphError::RejectNonpositiveWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::new(2, [(0, 1, Value::from(-0.5))]),
            Err(GraphError::RejectNonpositiveWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::uniform(2, [(0, 2)]),
            Err(GraphError::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn weighted_totals_are_exact() {
        let g = WeightedGraph::new(
            3,
            [(0, 1, Value::from(ratio(1, 2))), (1, 2, Value::from(ratio(1, 3)))],
        )
        .unwrap();
        assert_eq!(g.vertex_weight(1), Value::from(ratio(5, 6)));
        assert_eq!(*g.total_weight(), Value::from(ratio(5, 3)));
    }

    #[test]
    fn oriented_edge_indexing() {
        let g = WeightedGraph::uniform(3, [(1, 2), (0, 1)]).unwrap();
        let oriented: Vec<_> = g.oriented_edges().collect();
        assert_eq!(oriented, vec![(1, 2), (2, 1), (0, 1), (1, 0)]);
        for (i, &(a, b)) in oriented.iter().enumerate() {
            assert_eq!(g.oriented_index(a, b), Some(i));
        }
        assert_eq!(g.oriented_index(0, 2), None);
    }
}
