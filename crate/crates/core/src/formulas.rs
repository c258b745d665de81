//! Closed-form values for the graph families handled by the crate, and the
//! cumulative-distance rearrangement of a map on a path graph.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::graph::WeightedGraph;
use crate::metric::{FiniteMetricSpace, MetricError, PointMap};
use crate::number::{ratio, Numbers, Rational, Value};

/// Largest exponent accepted by the tree formulas.
pub const MAX_TREE_RADIUS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormulaError {
    #[error("{formula}: {reason}")]
    DomainError { formula: String, reason: String },
    #[error("distortion {0} is below 1")]
    DistortionBelowOne(f64),
    #[error("graph is not a path with vertices in chain order")]
    NotAPathGraph,
    #[error("unknown formula `{0}`")]
    UnknownFormula(String),
    #[error("{formula}: missing parameter `{name}`")]
    MissingParameter { formula: String, name: String },
    #[error("invalid value `{value}` for parameter `{name}`")]
    InvalidParameter { name: String, value: String },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

fn domain(formula: &str, reason: impl Into<String>) -> FormulaError {
    FormulaError::DomainError {
        formula: formula.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormValue {
    pub formula_id: String,
    pub parameters: Vec<(String, String)>,
    pub value: Value,
}

/// Quotient of the identity map `H_n → H_n` (Hamming metric): `4/(n(n+1))`.
pub fn hamming_identity_value(n: usize) -> Result<Rational, FormulaError> {
    if n == 0 {
        return Err(domain("hamming-identity", "n must be at least 1"));
    }
    let n = BigInt::from(n);
    Ok(Rational::new(BigInt::from(4), &n * (&n + 1)))
}

fn tree_domain(formula: &str, d: usize, r: usize) -> Result<(BigInt, usize), FormulaError> {
    if d < 3 {
        return Err(domain(formula, format!("degree {d} is below 3")));
    }
    if r == 0 {
        return Err(domain(formula, "radius must be at least 1"));
    }
    if r > MAX_TREE_RADIUS {
        return Err(domain(formula, format!("radius {r} exceeds {MAX_TREE_RADIUS}")));
    }
    Ok((BigInt::from(d), r))
}

/// Lower bound on `λ(T_{d,r}, X)` for any CAT(0) target, from routing along
/// tree geodesics with exponential edge weights:
/// `(d−2)/(d²(d−1)) · ((d−1)^r − 1)/(d−1)^r · (d−1)^{−r}`.
pub fn tree_path_lower_bound(d: usize, r: usize) -> Result<Rational, FormulaError> {
    let (d, r) = tree_domain("tree-lower", d, r)?;
    let s: BigInt = &d - 1;
    let b: BigInt = num_traits::pow(s.clone(), r);
    let lead = Rational::new(&d - 2, &d * &d * &s);
    Ok(lead * Rational::new(&b - 1, b.clone()) * Rational::new(BigInt::one(), b))
}

/// Upper bound on `λ(T_{d,r}, X)`: the quotient of the cut across a central
/// edge.
pub fn tree_cut_upper_bound(d: usize, r: usize) -> Result<Rational, FormulaError> {
    let (d, r) = tree_domain("tree-upper", d, r)?;
    let s: BigInt = &d - 1;
    let a: BigInt = num_traits::pow(s.clone(), r - 1);
    let b: BigInt = num_traits::pow(s.clone(), r);
    let q = |p: BigInt, q: BigInt| Rational::new(p, q);
    let bracket = q(&d * (&a - 1), &d - 2)
        + Rational::from_integer(a.clone())
        + q((&a - 1) * &b, &b - 1)
        + q((&d - 2) * &a * &b, &d * (&b - 1));
    Ok(Rational::from_integer(BigInt::from(2)) / bracket)
}

/// `μ₁(P_n) = 1 − cos(π/n)` for the path with `n` edges. Exact for `n ≤ 3`,
/// the only cases where the cosine is rational.
pub fn path_graph_mu1(n: usize) -> Result<Value, FormulaError> {
    match n {
        0 | 1 => Err(domain("path-mu1", "n must be at least 2")),
        2 => Ok(Value::from(1)),
        3 => Ok(Value::from(ratio(1, 2))),
        _ => Ok(Value::Approx(1.0 - (PI / n as f64).cos())),
    }
}

/// `μ₁ / D²`: a lower bound on `λ(G, X)` when every `n`-point subset of `X`
/// embeds in Hilbert space with distortion at most `D`.
pub fn distortion_lower_bound(mu1: f64, distortion: f64) -> Result<f64, FormulaError> {
    if distortion.is_nan() || distortion < 1.0 {
        return Err(FormulaError::DistortionBelowOne(distortion));
    }
    Ok(mu1 / (distortion * distortion))
}

/// Reference curve `1/(ln n)²`. Shape only: the true bound holds up to an
/// unknown universal constant.
pub fn log_ratio_curve(n: usize) -> Result<f64, FormulaError> {
    if n < 2 {
        return Err(domain("log-ratio", "n must be at least 2"));
    }
    let l = (n as f64).ln();
    Ok(1.0 / (l * l))
}

/// Checks that `graph` has edges exactly `{i, i+1}`.
fn check_chain(graph: &WeightedGraph) -> Result<(), FormulaError> {
    let n = graph.vertex_count();
    if graph.edge_count() + 1 != n {
        return Err(FormulaError::NotAPathGraph);
    }
    if (1..n).all(|i| graph.edge_index(i - 1, i).is_some()) {
        Ok(())
    } else {
        Err(FormulaError::NotAPathGraph)
    }
}

/// `φ(v_i) = Σ_{l ≤ i} d(f(v_{l−1}), f(v_l))`, with `φ(v_0) = 0`.
pub fn rearrangement_phi(
    graph: &WeightedGraph,
    space: &FiniteMetricSpace,
    map: &[usize],
) -> Result<Numbers, FormulaError> {
    check_chain(graph)?;
    PointMap::new(map.to_vec(), graph.vertex_count(), space.len())?;
    let mut acc = Value::from(0);
    let mut out = vec![acc.clone()];
    for i in 1..map.len() {
        acc = add(&acc, &space.distance(map[i - 1], map[i]));
        out.push(acc.clone());
    }
    Ok(Numbers::from_values(out))
}

fn add(a: &Value, b: &Value) -> Value {
    match (a, b) {
        (Value::Exact(x), Value::Exact(y)) => Value::Exact(x + y),
        _ => Value::Approx(a.to_f64() + b.to_f64()),
    }
}

/// Names accepted by [`evaluate_formula`] with their parameters.
pub const FORMULAS: &[(&str, &[&str])] = &[
    ("hamming-identity", &["n"]),
    ("tree-lower", &["d", "r"]),
    ("tree-upper", &["d", "r"]),
    ("path-mu1", &["n"]),
    ("euclidean-lower", &["mu1", "distortion"]),
    ("log-ratio", &["n"]),
];

fn param<'a>(formula: &str, params: &'a BTreeMap<String, String>, name: &str) -> Result<&'a str, FormulaError> {
    params
        .get(name)
        .map(String::as_str)
        .ok_or_else(|| FormulaError::MissingParameter {
            formula: formula.to_string(),
            name: name.to_string(),
        })
}

fn int_param(formula: &str, params: &BTreeMap<String, String>, name: &str) -> Result<usize, FormulaError> {
    let raw = param(formula, params, name)?;
    raw.trim().parse().map_err(|_| FormulaError::InvalidParameter {
        name: name.to_string(),
        value: raw.to_string(),
    })
}

fn real_param(formula: &str, params: &BTreeMap<String, String>, name: &str) -> Result<f64, FormulaError> {
    let raw = param(formula, params, name)?;
    if let Some(arg) = raw.trim().strip_prefix("sqrt(").and_then(|s| s.strip_suffix(')')) {
        let v: Value = arg.parse().map_err(|_| FormulaError::InvalidParameter {
            name: name.to_string(),
            value: raw.to_string(),
        })?;
        return Ok(v.to_f64().sqrt());
    }
    raw.trim()
        .parse::<Value>()
        .map(|v| v.to_f64())
        .map_err(|_| FormulaError::InvalidParameter {
            name: name.to_string(),
            value: raw.to_string(),
        })
}

/// Evaluates a named closed form. Real parameters accept integers, `p/q`,
/// decimals and `sqrt(x)`.
pub fn evaluate_formula(name: &str, params: &BTreeMap<String, String>) -> Result<ClosedFormValue, FormulaError> {
    let expected = FORMULAS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, p)| *p)
        .ok_or_else(|| FormulaError::UnknownFormula(name.to_string()))?;
    let value = match name {
        "hamming-identity" => Value::Exact(hamming_identity_value(int_param(name, params, "n")?)?),
        "tree-lower" => Value::Exact(tree_path_lower_bound(
            int_param(name, params, "d")?,
            int_param(name, params, "r")?,
        )?),
        "tree-upper" => Value::Exact(tree_cut_upper_bound(
            int_param(name, params, "d")?,
            int_param(name, params, "r")?,
        )?),
        "path-mu1" => path_graph_mu1(int_param(name, params, "n")?)?,
        "euclidean-lower" => Value::Approx(distortion_lower_bound(
            real_param(name, params, "mu1")?,
            real_param(name, params, "distortion")?,
        )?),
        "log-ratio" => Value::Approx(log_ratio_curve(int_param(name, params, "n")?)?),
        _ => unreachable!(),
    };
    let parameters = expected
        .iter()
        .map(|p| (p.to_string(), params[*p].trim().to_string()))
        .collect();
    Ok(ClosedFormValue {
        formula_id: name.to_string(),
        parameters,
        value,
    })
}

/// Parses `k=v,k=v`.
pub fn parse_params(s: &str) -> Result<BTreeMap<String, String>, FormulaError> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| FormulaError::InvalidParameter {
            name: part.to_string(),
            value: String::new(),
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}
