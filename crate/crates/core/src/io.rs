//! Plain-text formats for graphs, metrics, point configurations and path
//! weights.
//!
//! All formats are line based. Text after `#` is a comment and blank lines
//! are skipped. Numbers are integers or `p/q` (read exactly) or decimals (read as
//! `f64`).
//!
//! ```text
//! graph <n_vertices> <n_edges>      metric <k>          points <k> <dim>
//! u v weight                        d00 d01 ...         x0 x1 ...
//! ```
//!
//! A path-weight file is `w <n_edges>` followed by `u v weight` lines.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::graph::{GraphError, WeightedGraph};
use crate::metric::{EuclideanConfig, FiniteMetricSpace, MetricError};
use crate::number::{format_rational, Value};
use crate::paths::{EdgeWeightW, PathError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Path(#[from] PathError),
}

fn syntax(line: usize, message: impl Into<String>) -> IoError {
    IoError::Syntax {
        line,
        message: message.into(),
    }
}

/// Non-comment lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| (i, l.split_whitespace().collect()))
}

fn parse_usize(line: usize, tok: &str, what: &str) -> Result<usize, IoError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("{what} `{tok}` is not a nonnegative integer")))
}

fn parse_value(line: usize, tok: &str) -> Result<Value, IoError> {
    tok.parse().map_err(|_| syntax(line, format!("cannot parse number `{tok}`")))
}

/// Writes a value so that reading it back gives the same value and kind.
pub fn format_value(v: &Value) -> String {
    match v {
        Value::Exact(q) => format_rational(q),
        Value::Approx(x) => format!("{x:?}"),
    }
}

type Lines<'a> = std::iter::Peekable<Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a>>;

fn lines(text: &str) -> Lines<'_> {
    let it: Box<dyn Iterator<Item = (usize, Vec<&str>)>> = Box::new(content_lines(text));
    it.peekable()
}

fn header<'a>(lines: &mut Lines<'a>, tag: &str, arity: usize) -> Result<(usize, Vec<usize>), IoError> {
    let (line, toks) = lines.next().ok_or_else(|| syntax(0, format!("missing `{tag}` header")))?;
    if toks[0] != tag || toks.len() != arity + 1 {
        return Err(syntax(line, format!("expected header `{tag}` with {arity} count(s)")));
    }
    let counts = toks[1..]
        .iter()
        .map(|t| parse_usize(line, t, "count"))
        .collect::<Result<_, _>>()?;
    Ok((line, counts))
}

fn edge_lines(lines: &mut Lines<'_>, count: usize) -> Result<Vec<(usize, usize, Value)>, IoError> {
    let mut out = Vec::with_capacity(count);
    let mut last_line = 0;
    for (line, toks) in lines.by_ref() {
        last_line = line;
        if toks.len() != 3 {
            return Err(syntax(line, "expected `u v weight`"));
        }
        out.push((
            parse_usize(line, toks[0], "vertex")?,
            parse_usize(line, toks[1], "vertex")?,
            parse_value(line, toks[2])?,
        ));
    }
    if out.len() != count {
        return Err(syntax(
            last_line,
            format!("header declares {count} edges, found {}", out.len()),
        ));
    }
    Ok(out)
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph, IoError> {
    let mut lines = lines(text);
    let (_, counts) = header(&mut lines, "graph", 2)?;
    let edges = edge_lines(&mut lines, counts[1])?;
    Ok(WeightedGraph::new(counts[0], edges)?)
}

pub fn write_graph(graph: &WeightedGraph) -> String {
    let mut out = format!("graph {} {}\n", graph.vertex_count(), graph.edge_count());
    for (i, e) in graph.edges().iter().enumerate() {
        let _ = writeln!(out, "{} {} {}", e.u, e.v, format_value(&graph.edge_weight(i)));
    }
    out
}

pub fn parse_metric(text: &str) -> Result<FiniteMetricSpace, IoError> {
    let mut lines = lines(text);
    let (_, counts) = header(&mut lines, "metric", 1)?;
    let k = counts[0];
    let mut rows = Vec::with_capacity(k);
    for (line, toks) in lines {
        let row = toks
            .iter()
            .map(|t| parse_value(line, t))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.len() != k {
        return Err(syntax(0, format!("header declares {k} rows, found {}", rows.len())));
    }
    Ok(FiniteMetricSpace::new(rows)?)
}

pub fn write_metric(space: &FiniteMetricSpace) -> String {
    let mut out = format!("metric {}\n", space.len());
    for row in space.rows() {
        let cells: Vec<String> = row.iter().map(format_value).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

pub fn parse_points(text: &str) -> Result<EuclideanConfig, IoError> {
    let mut lines = lines(text);
    let (_, counts) = header(&mut lines, "points", 2)?;
    let (k, dim) = (counts[0], counts[1]);
    let mut points = Vec::with_capacity(k);
    for (line, toks) in lines {
        if toks.len() != dim {
            return Err(syntax(line, format!("expected {dim} coordinates")));
        }
        let p = toks
            .iter()
            .map(|t| parse_value(line, t).map(|v| v.to_f64()))
            .collect::<Result<Vec<_>, _>>()?;
        points.push(p);
    }
    if points.len() != k {
        return Err(syntax(0, format!("header declares {k} points, found {}", points.len())));
    }
    Ok(EuclideanConfig::new(points)?)
}

pub fn parse_edge_weights(text: &str, graph: &WeightedGraph) -> Result<EdgeWeightW, IoError> {
    let mut lines = lines(text);
    let (_, counts) = header(&mut lines, "w", 1)?;
    let entries = edge_lines(&mut lines, counts[0])?;
    Ok(EdgeWeightW::from_edge_list(graph, entries)?)
}

pub fn write_edge_weights(graph: &WeightedGraph, w: &EdgeWeightW) -> String {
    let mut out = format!("w {}\n", graph.edge_count());
    for (i, e) in graph.edges().iter().enumerate() {
        let _ = writeln!(out, "{} {} {}", e.u, e.v, format_value(&w.get(i)));
    }
    out
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_hamming, gen_random_regular, gen_tree_ball};
    use crate::number::ratio;

    #[test]
    fn graph_round_trip_is_exact() {
        let text = "# a weighted triangle\ngraph 3 3\n0 1 1/3\n1 2 2\n\n0 2 5/7\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(g.edge_weight(0), Value::from(ratio(1, 3)));
        assert!(g.is_exact());
        let again = parse_graph(&write_graph(&g)).unwrap();
        assert_eq!(write_graph(&again), write_graph(&g));
        assert_eq!(again.total_weight(), g.total_weight());
        for g in [gen_hamming(3).unwrap(), gen_tree_ball(3, 2).unwrap(), gen_random_regular(10, 3, 2).unwrap()] {
            assert_eq!(write_graph(&parse_graph(&write_graph(&g)).unwrap()), write_graph(&g));
        }
    }

    #[test]
    fn trailing_comments() {
        let g = parse_graph("graph 2 1   # header\n0 1 3 # edge\n").unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn float_weights_stay_float() {
        let g = parse_graph("graph 2 1\n0 1 1.0\n").unwrap();
        assert!(!g.is_exact());
        let text = write_graph(&g);
        assert_eq!(text, "graph 2 1\n0 1 1.0\n");
        assert!(!parse_graph(&text).unwrap().is_exact());
    }

    #[test]
    fn graph_errors() {
        assert!(matches!(parse_graph(""), Err(IoError::Syntax { .. })));
        assert!(matches!(parse_graph("graph 3\n"), Err(IoError::Syntax { .. })));
        assert!(matches!(parse_graph("graph 3 2\n0 1 1\n"), Err(IoError::Syntax { .. })));
        assert!(matches!(parse_graph("graph 3 2\n0 1 1\n1 2 x\n"), Err(IoError::Syntax { line: 3, .. })));
        assert!(matches!(
            parse_graph("graph 3 2\n0 1 1\n1 1 1\n"),
            Err(IoError::Graph(GraphError::RejectLoop(1)))
        ));
        assert!(matches!(
            parse_graph("graph 4 2\n0 1 1\n2 3 1\n"),
            Err(IoError::Graph(GraphError::RejectDisconnected(_)))
        ));
        assert!(matches!(
            parse_graph("graph 2 1\n0 1 -1\n"),
            Err(IoError::Graph(GraphError::RejectNonpositiveWeight { .. }))
        ));
    }

    #[test]
    fn metric_round_trip() {
        let text = "metric 3\n# rows\n0 1 3/2\n1 0 1\n3/2 1 0\n";
        let x = parse_metric(text).unwrap();
        assert!(x.is_exact());
        assert_eq!(x.distance(0, 2), Value::from(ratio(3, 2)));
        assert_eq!(write_metric(&parse_metric(&write_metric(&x)).unwrap()), write_metric(&x));
        assert!(matches!(
            parse_metric("metric 3\n0 1 5\n1 0 1\n5 1 0\n"),
            Err(IoError::Metric(MetricError::TriangleViolation { .. }))
        ));
        assert!(matches!(parse_metric("metric 2\n0 1\n"), Err(IoError::Syntax { .. })));
    }

    #[test]
    fn points_file() {
        let cfg = parse_points("points 4 2\n0 0\n1 0\n1 1\n0 1\n").unwrap();
        assert_eq!(cfg.dimension(), 2);
        assert!(parse_points("points 2 2\n0 0\n1\n").is_err());
    }

    #[test]
    fn edge_weight_file() {
        let g = gen_tree_ball(3, 1).unwrap();
        let w = parse_edge_weights("w 3\n1 0 2\n0 2 2\n0 3 1/2\n", &g).unwrap();
        assert_eq!(w.get(2), Value::from(ratio(1, 2)));
        let back = parse_edge_weights(&write_edge_weights(&g, &w), &g).unwrap();
        assert_eq!(back, w);
        assert!(matches!(
            parse_edge_weights("w 1\n1 2 1\n", &g),
            Err(IoError::Path(PathError::EdgeOutsideSupport(1, 2)))
        ));
    }
}
