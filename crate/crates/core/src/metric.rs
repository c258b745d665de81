//! Finite target metric spaces, maps into them, and map distortion.

use num_traits::Zero;
use thiserror::Error;

use crate::graph::WeightedGraph;
use crate::number::{Numbers, Rational, Scalar, Value};

/// Tolerance on symmetry and the triangle inequality for float matrices.
pub const TRIANGLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("metric space needs at least 2 points, got {0}")]
    TooSmall(usize),
    #[error("distance matrix is not square (row {row} has {len} entries, expected {k})")]
    NotSquare { row: usize, len: usize, k: usize },
    #[error("distance matrix is not symmetric at ({0}, {1})")]
    AsymmetricMatrix(usize, usize),
    #[error("nonzero diagonal entry at ({0}, {0})")]
    NonzeroDiagonal(usize),
    #[error("distance between distinct points {0} and {1} is not positive")]
    NonpositiveOffDiagonal(usize, usize),
    #[error("triangle inequality fails: d({i},{j}) > d({i},{l}) + d({l},{j})")]
    TriangleViolation { i: usize, j: usize, l: usize },
    #[error("two-point distance must be positive, got {0}")]
    NonpositiveDelta(String),
    #[error("duplicate value {0} in real point set")]
    DuplicateValue(String),
    #[error("map has {got} entries but the source has {expected} points")]
    MapLengthMismatch { expected: usize, got: usize },
    #[error("map sends {vertex} to point {point}, but the target has {k} points")]
    PointOutOfRange { vertex: usize, point: usize, k: usize },
    #[error("invalid Euclidean configuration: {0}")]
    InvalidConfig(String),
}

/// A validated finite metric space on points `0..k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    k: usize,
    /// Row-major `k × k`.
    dist: Numbers,
}

impl FiniteMetricSpace {
    /// Validates a square distance matrix.
    pub fn new(rows: Vec<Vec<Value>>) -> Result<Self, MetricError> {
        let k = rows.len();
        if k < 2 {
            return Err(MetricError::TooSmall(k));
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(MetricError::NotSquare { row, len: r.len(), k });
            }
        }
        let dist = Numbers::from_values(rows.into_iter().flatten().collect());
        match dist {
            Numbers::Exact(d) => {
                validate_exact(k, &d)?;
                Ok(FiniteMetricSpace { k, dist: Numbers::Exact(d) })
            }
            Numbers::Float(d) => {
                let d = validate_float(k, d)?;
                Ok(FiniteMetricSpace { k, dist: Numbers::Float(d) })
            }
        }
    }

    pub fn from_f64(rows: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        Self::new(
            rows.into_iter()
                .map(|r| r.into_iter().map(Value::from).collect())
                .collect(),
        )
    }

    pub fn from_integers(rows: Vec<Vec<i64>>) -> Result<Self, MetricError> {
        Self::new(
            rows.into_iter()
                .map(|r| r.into_iter().map(Value::from).collect())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_exact(&self) -> bool {
        self.dist.is_exact()
    }

    pub fn distance(&self, i: usize, j: usize) -> Value {
        self.dist.get(i * self.k + j)
    }

    pub fn distance_f64(&self, i: usize, j: usize) -> f64 {
        self.dist.get_f64(i * self.k + j)
    }

    pub fn rows(&self) -> Vec<Vec<Value>> {
        (0..self.k)
            .map(|i| (0..self.k).map(|j| self.distance(i, j)).collect())
            .collect()
    }

    /// Row-major squared distances in scalar type `S`.
    pub fn squared_distances<S: Scalar>(&self) -> Vec<S> {
        self.dist
            .to_scalars::<S>()
            .into_iter()
            .map(|d| d.clone() * d)
            .collect()
    }

    /// Every distance multiplied by `c > 0`.
    pub fn scaled(&self, c: &Value) -> Self {
        let rows = self
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|d| crate::graph::mul_values(d, c)).collect())
            .collect();
        FiniteMetricSpace::new(rows).expect("positive scaling preserves the metric axioms")
    }
}

fn validate_exact(k: usize, d: &[Rational]) -> Result<(), MetricError> {
    let at = |i: usize, j: usize| &d[i * k + j];
    for i in 0..k {
        if !at(i, i).is_zero() {
            return Err(MetricError::NonzeroDiagonal(i));
        }
        for j in 0..k {
            if at(i, j) != at(j, i) {
                return Err(MetricError::AsymmetricMatrix(i.min(j), i.max(j)));
            }
            if i != j && *at(i, j) <= Rational::zero() {
                return Err(MetricError::NonpositiveOffDiagonal(i, j));
            }
        }
    }
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                if *at(i, j) > at(i, l) + at(l, j) {
                    return Err(MetricError::TriangleViolation { i, j, l });
                }
            }
        }
    }
    Ok(())
}

fn validate_float(k: usize, mut d: Vec<f64>) -> Result<Vec<f64>, MetricError> {
    for i in 0..k {
        if d[i * k + i] != 0.0 {
            return Err(MetricError::NonzeroDiagonal(i));
        }
        for j in i + 1..k {
            let (a, b) = (d[i * k + j], d[j * k + i]);
            if !a.is_finite() || !b.is_finite() || (a - b).abs() > TRIANGLE_TOLERANCE {
                return Err(MetricError::AsymmetricMatrix(i, j));
            }
            let mean = 0.5 * (a + b);
            d[i * k + j] = mean;
            d[j * k + i] = mean;
            if mean <= 0.0 {
                return Err(MetricError::NonpositiveOffDiagonal(i, j));
            }
        }
    }
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                if d[i * k + j] > d[i * k + l] + d[l * k + j] + TRIANGLE_TOLERANCE {
                    return Err(MetricError::TriangleViolation { i, j, l });
                }
            }
        }
    }
    Ok(d)
}

/// Validates a distance matrix; alias of [`FiniteMetricSpace::new`].
pub fn validate_metric(rows: Vec<Vec<Value>>) -> Result<FiniteMetricSpace, MetricError> {
    FiniteMetricSpace::new(rows)
}

/// Two points at distance `delta`.
pub fn two_point_space(delta: impl Into<Value>) -> Result<FiniteMetricSpace, MetricError> {
    let delta = delta.into();
    if !delta.is_positive() || !delta.is_finite() {
        return Err(MetricError::NonpositiveDelta(delta.to_string()));
    }
    let zero = match delta {
        Value::Exact(_) => Value::from(0),
        Value::Approx(_) => Value::from(0.0),
    };
    FiniteMetricSpace::new(vec![
        vec![zero.clone(), delta.clone()],
        vec![delta, zero],
    ])
}

/// A finite subset of the real line with `|a - b|` distances.
pub fn real_points_space<V: Into<Value>>(
    values: impl IntoIterator<Item = V>,
) -> Result<FiniteMetricSpace, MetricError> {
    let values = Numbers::from_values(values.into_iter().map(Into::into).collect());
    let k = values.len();
    let rows: Vec<Vec<Value>> = match &values {
        Numbers::Exact(v) => {
            for i in 0..k {
                for j in i + 1..k {
                    if v[i] == v[j] {
                        return Err(MetricError::DuplicateValue(values.get(i).to_string()));
                    }
                }
            }
            v.iter()
                .map(|a| v.iter().map(|b| Value::Exact(num_traits::Signed::abs(&(a - b)))).collect())
                .collect()
        }
        Numbers::Float(v) => {
            for i in 0..k {
                for j in i + 1..k {
                    if v[i] == v[j] {
                        return Err(MetricError::DuplicateValue(v[i].to_string()));
                    }
                }
            }
            v.iter()
                .map(|a| v.iter().map(|b| Value::Approx((a - b).abs())).collect())
                .collect()
        }
    };
    FiniteMetricSpace::new(rows)
}

/// The hop (unweighted shortest-path) metric of `graph`.
pub fn graph_metric_space(graph: &WeightedGraph) -> FiniteMetricSpace {
    let n = graph.vertex_count();
    let rows = (0..n)
        .map(|x| {
            graph
                .hop_distances(x)
                .into_iter()
                .map(|d| Value::from(d as i64))
                .collect()
        })
        .collect::<Vec<Vec<Value>>>();
    let dist = Numbers::from_values(rows.into_iter().flatten().collect());
    FiniteMetricSpace { k: n, dist }
}

/// A total map from `0..n` into the points `0..k` of a target space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointMap {
    assignment: Vec<usize>,
}

impl PointMap {
    pub fn new(assignment: Vec<usize>, source: usize, k: usize) -> Result<Self, MetricError> {
        if assignment.len() != source {
            return Err(MetricError::MapLengthMismatch {
                expected: source,
                got: assignment.len(),
            });
        }
        if let Some((vertex, &point)) = assignment.iter().enumerate().find(|(_, &p)| p >= k) {
            return Err(MetricError::PointOutOfRange { vertex, point, k });
        }
        Ok(PointMap { assignment })
    }

    pub fn identity(n: usize) -> Self {
        PointMap {
            assignment: (0..n).collect(),
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.assignment.windows(2).all(|w| w[0] == w[1])
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.assignment
    }
}

/// Points in `ℝ^dim` with the Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanConfig {
    points: Vec<Vec<f64>>,
}

impl EuclideanConfig {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| MetricError::InvalidConfig("no points".into()))?;
        if dim == 0 {
            return Err(MetricError::InvalidConfig("dimension must be at least 1".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(MetricError::InvalidConfig(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(MetricError::InvalidConfig(format!("point {i} has a non-finite coordinate")));
            }
        }
        Ok(EuclideanConfig { points })
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }
}

/// Anything with pairwise distances on `0..len()`.
pub trait PointDistances {
    fn point_count(&self) -> usize;
    fn point_distance(&self, i: usize, j: usize) -> f64;
}

impl PointDistances for FiniteMetricSpace {
    fn point_count(&self) -> usize {
        self.k
    }
    fn point_distance(&self, i: usize, j: usize) -> f64 {
        self.distance_f64(i, j)
    }
}

impl PointDistances for EuclideanConfig {
    fn point_count(&self) -> usize {
        self.points.len()
    }
    fn point_distance(&self, i: usize, j: usize) -> f64 {
        self.points[i]
            .iter()
            .zip(&self.points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Distortion of `map: X → Y`: max expansion times max contraction over
/// distinct pairs. Non-injective maps have distortion `+∞`.
pub fn distortion_of_map<Y: PointDistances + ?Sized>(
    source: &FiniteMetricSpace,
    image: &Y,
    map: &[usize],
) -> Result<f64, MetricError> {
    let pm = PointMap::new(map.to_vec(), source.len(), image.point_count())?;
    let f = pm.as_slice();
    let mut expansion: f64 = 0.0;
    let mut contraction: f64 = 0.0;
    for i in 0..source.len() {
        for j in i + 1..source.len() {
            let dy = image.point_distance(f[i], f[j]);
            if f[i] == f[j] || dy == 0.0 {
                return Ok(f64::INFINITY);
            }
            let dx = source.distance_f64(i, j);
            expansion = expansion.max(dy / dx);
            contraction = contraction.max(dx / dy);
        }
    }
    Ok(expansion * contraction)
}
