//! Bound reports: run a set of estimators on one graph and target, check the
//! results are mutually consistent, and emit JSON or CSV.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::formulas;
use crate::gap::{self, SearchOptions};
use crate::graph::{Family, WeightedGraph};
use crate::metric::{graph_metric_space, real_points_space, two_point_space, FiniteMetricSpace};
use crate::number::{Rational, Scalar, Value};
use crate::paths::{self, EdgeWeightW, PathAssignment};
use crate::spectral;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "sgt";

/// Absolute slack allowed when a consistency check involves a float value.
pub const SANDWICH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("{entry}: {source}")]
    Entry { entry: String, source: Box<Error> },
    #[error("inconsistent bounds: {lower} > {upper} ({detail})")]
    InconsistentBounds {
        lower: String,
        upper: String,
        detail: String,
    },
    #[error("report does not parse: {0}")]
    Parse(String),
}

fn entry_error(entry: &str, e: impl Into<Error>) -> ReportError {
    ReportError::Entry {
        entry: entry.to_string(),
        source: Box::new(e.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Lower,
    Upper,
    Exact,
    Reference,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Lower => "lower",
            Kind::Upper => "upper",
            Kind::Exact => "exact",
            Kind::Reference => "reference",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub name: String,
    pub kind: Kind,
    /// `p/q` when the value is an exact rational.
    pub exact: Option<String>,
    pub decimal: f64,
    pub method: String,
    pub parameters: BTreeMap<String, String>,
    pub runtime_ms: Option<f64>,
}

impl Entry {
    pub fn new(name: &str, kind: Kind, value: &Value, method: &str) -> Self {
        Entry {
            name: name.to_string(),
            kind,
            exact: value.exact_string(),
            decimal: value.to_f64(),
            method: method.to_string(),
            parameters: BTreeMap::new(),
            runtime_ms: None,
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn value(&self) -> Value {
        self.exact
            .as_deref()
            .and_then(|s| s.parse().ok())
            .unwrap_or(Value::Approx(self.decimal))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDescriptor {
    /// `generator` or `file`.
    pub source: String,
    pub family: Option<String>,
    pub parameters: BTreeMap<String, String>,
    pub vertices: usize,
    pub edges: usize,
    pub sha256: Option<String>,
}

impl GraphDescriptor {
    pub fn generated(graph: &WeightedGraph) -> Self {
        let (family, parameters) = match graph.family() {
            Some(f) => (
                Some(f.name().to_string()),
                f.parameters().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            ),
            None => (None, BTreeMap::new()),
        };
        GraphDescriptor {
            source: "generator".into(),
            family,
            parameters,
            vertices: graph.vertex_count(),
            edges: graph.edge_count(),
            sha256: None,
        }
    }

    pub fn file(graph: &WeightedGraph, sha256: String) -> Self {
        GraphDescriptor {
            source: "file".into(),
            family: None,
            parameters: BTreeMap::new(),
            vertices: graph.vertex_count(),
            edges: graph.edge_count(),
            sha256: Some(sha256),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetDescriptor {
    /// `self`, `two-point`, `line` or `metric`.
    pub kind: String,
    pub points: usize,
    pub parameters: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub graph: GraphDescriptor,
    pub target: TargetDescriptor,
    pub seeds: Vec<u64>,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    /// The graph's own hop metric.
    SelfMetric,
    /// Two points at the given distance.
    TwoPoint(Value),
    /// Distinct points on the real line.
    Line(Vec<Value>),
    /// Any finite metric space, labelled e.g. by a file hash.
    Metric { space: FiniteMetricSpace, label: String },
}

impl TargetSpec {
    pub fn space(&self, graph: &WeightedGraph) -> Result<FiniteMetricSpace, Error> {
        Ok(match self {
            TargetSpec::SelfMetric => graph_metric_space(graph),
            TargetSpec::TwoPoint(d) => two_point_space(d.clone())?,
            TargetSpec::Line(pts) => real_points_space(pts.iter().cloned())?,
            TargetSpec::Metric { space, .. } => space.clone(),
        })
    }

    /// Targets that embed isometrically in the real line.
    pub fn is_linear(&self) -> bool {
        matches!(self, TargetSpec::TwoPoint(_) | TargetSpec::Line(_))
    }

    fn descriptor(&self, points: usize) -> TargetDescriptor {
        let mut parameters = BTreeMap::new();
        let kind = match self {
            TargetSpec::SelfMetric => "self",
            TargetSpec::TwoPoint(d) => {
                parameters.insert("delta".into(), d.to_string());
                "two-point"
            }
            TargetSpec::Line(pts) => {
                let list: Vec<String> = pts.iter().map(Value::to_string).collect();
                parameters.insert("points".into(), list.join(","));
                "line"
            }
            TargetSpec::Metric { label, .. } => {
                parameters.insert("source".into(), label.clone());
                "metric"
            }
        };
        TargetDescriptor {
            kind: kind.into(),
            points,
            parameters,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathStrategy {
    /// Tree geodesics on trees, bit fixing on Hamming cubes, BFS otherwise.
    Auto,
    Bfs,
    Tree,
    Bitfix,
}

impl PathStrategy {
    pub fn resolve(self, graph: &WeightedGraph) -> PathStrategy {
        match self {
            PathStrategy::Auto if graph.is_tree() => PathStrategy::Tree,
            PathStrategy::Auto if matches!(graph.family(), Some(Family::Hamming { .. })) => PathStrategy::Bitfix,
            PathStrategy::Auto => PathStrategy::Bfs,
            s => s,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PathStrategy::Auto => "auto",
            PathStrategy::Bfs => "bfs",
            PathStrategy::Tree => "tree",
            PathStrategy::Bitfix => "bitfix",
        }
    }

    pub fn build(self, graph: &WeightedGraph) -> Result<PathAssignment, paths::PathError> {
        match self.resolve(graph) {
            PathStrategy::Tree => paths::tree_geodesic_paths(graph),
            PathStrategy::Bitfix => paths::hamming_bitfix_paths(graph),
            _ => Ok(paths::bfs_paths(graph)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightStrategy {
    /// Exponential weights on tree balls, uniform otherwise.
    Auto,
    Uniform,
    TreeExponential,
    Custom { w: EdgeWeightW, label: String },
}

impl WeightStrategy {
    pub fn build(&self, graph: &WeightedGraph) -> Result<(EdgeWeightW, String), paths::PathError> {
        match self {
            WeightStrategy::Auto if graph.levels().is_some() => {
                Ok((EdgeWeightW::tree_exponential(graph)?, "tree-exp".into()))
            }
            WeightStrategy::Auto | WeightStrategy::Uniform => Ok((EdgeWeightW::uniform(graph), "uniform".into())),
            WeightStrategy::TreeExponential => Ok((EdgeWeightW::tree_exponential(graph)?, "tree-exp".into())),
            WeightStrategy::Custom { w, label } => Ok((w.clone(), label.clone())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSpec {
    Mu1,
    PathBound,
    GapExact,
    GapSearch,
    Identity,
    Cut,
    ClosedForms,
}

impl BoundSpec {
    pub const ALL: [BoundSpec; 7] = [
        BoundSpec::Mu1,
        BoundSpec::PathBound,
        BoundSpec::GapExact,
        BoundSpec::GapSearch,
        BoundSpec::Identity,
        BoundSpec::Cut,
        BoundSpec::ClosedForms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundSpec::Mu1 => "mu1",
            BoundSpec::PathBound => "path-bound",
            BoundSpec::GapExact => "gap-exact",
            BoundSpec::GapSearch => "gap-search",
            BoundSpec::Identity => "identity",
            BoundSpec::Cut => "cut",
            BoundSpec::ClosedForms => "closed-forms",
        }
    }

    pub fn parse(s: &str) -> Option<BoundSpec> {
        BoundSpec::ALL.into_iter().find(|b| b.name() == s)
    }
}

#[derive(Debug, Clone)]
pub struct ReportRequest {
    pub graph: WeightedGraph,
    pub descriptor: GraphDescriptor,
    pub target: TargetSpec,
    pub bounds: Vec<BoundSpec>,
    /// Expands an `all` request: estimators that cannot run on this input
    /// are dropped instead of failing.
    pub skip_inapplicable: bool,
    pub paths: PathStrategy,
    pub weights: WeightStrategy,
    pub reverse_pairs: bool,
    pub search: SearchOptions,
    pub map_cap: u128,
    pub timings: bool,
}

impl ReportRequest {
    pub fn new(graph: WeightedGraph, descriptor: GraphDescriptor, target: TargetSpec) -> Self {
        ReportRequest {
            graph,
            descriptor,
            target,
            bounds: BoundSpec::ALL.to_vec(),
            skip_inapplicable: true,
            paths: PathStrategy::Auto,
            weights: WeightStrategy::Auto,
            reverse_pairs: false,
            search: SearchOptions::default(),
            map_cap: gap::DEFAULT_MAP_CAP,
            timings: false,
        }
    }
}

/// Whether `bound` can run on this request without failing for structural
/// reasons (wrong target, too many maps, too many vertices).
fn applicable(req: &ReportRequest, bound: BoundSpec, k: usize) -> bool {
    let n = req.graph.vertex_count();
    match bound {
        BoundSpec::Mu1 => n <= spectral::DEFAULT_DENSE_CAP,
        BoundSpec::GapExact => (k as u128)
            .checked_pow(n as u32)
            .is_some_and(|maps| maps <= req.map_cap),
        BoundSpec::Identity => req.target == TargetSpec::SelfMetric,
        _ => true,
    }
}

fn compute(req: &ReportRequest, space: &FiniteMetricSpace, bound: BoundSpec) -> Result<Vec<Entry>, ReportError> {
    let g = &req.graph;
    let name = bound.name();
    let wrap = |e: Error| ReportError::Entry {
        entry: name.to_string(),
        source: Box::new(e),
    };
    let start = Instant::now();
    let mut entries = match bound {
        BoundSpec::Mu1 => {
            let mu = spectral::mu1(g).map_err(|e| entry_error(name, e))?;
            let kind = if req.target.is_linear() { Kind::Lower } else { Kind::Reference };
            vec![Entry::new("mu1", kind, &Value::Approx(mu), "jacobi")]
        }
        BoundSpec::PathBound => {
            let assignment = req.paths.build(g).map_err(|e| entry_error(name, e))?;
            let assignment = if req.reverse_pairs {
                assignment.with_reversed_pairs()
            } else {
                assignment
            };
            let (w, w_label) = req.weights.build(g).map_err(|e| entry_error(name, e))?;
            let c = paths::congestion(g, &w, &assignment).map_err(|e| entry_error(name, e))?;
            vec![Entry::new("path-bound", Kind::Lower, &c.lower_bound(), "congestion")
                .with("paths", req.paths.resolve(g).name())
                .with("w", w_label)
                .with("reverse_pairs", req.reverse_pairs)
                .with("A", c.value.exact_string().unwrap_or_else(|| c.value.to_string()))
                .with("argmax_edge", format!("{}->{}", c.argmax_edge.0, c.argmax_edge.1))]
        }
        BoundSpec::GapExact => {
            let r = gap::gap_exact(g, space, req.map_cap).map_err(|e| entry_error(name, e))?;
            vec![Entry::new("gap-exact", Kind::Exact, &r.value, r.method.as_str())
                .with("maps_examined", r.maps_examined)
                .with("witness", join(&r.witness))]
        }
        BoundSpec::GapSearch => {
            let r = gap::gap_search(g, space, &req.search).map_err(|e| entry_error(name, e))?;
            vec![Entry::new("gap-search", Kind::Upper, &r.value, r.method.as_str())
                .with("seed", req.search.seed)
                .with("restarts", req.search.restarts)
                .with("max_sweeps", req.search.max_sweeps)
                .with("witness", join(&r.witness))]
        }
        BoundSpec::Identity => {
            if req.target != TargetSpec::SelfMetric {
                return Err(wrap(Error::Usage("the identity bound needs the self target".into())));
            }
            let q = gap::identity_upper_bound(g);
            vec![Entry::new("identity", Kind::Upper, &q.ratio, "identity-map")]
        }
        BoundSpec::Cut => {
            let best = best_cut(g);
            let q = gap::cut_quotient(g, &best.subset, 1).map_err(|e| entry_error(name, e))?;
            vec![Entry::new("cut", Kind::Upper, &q.ratio, "two-valued-map")
                .with("cut", best.description)
                .with("subset_size", best.subset.len())]
        }
        BoundSpec::ClosedForms => closed_forms(req).map_err(|e| entry_error(name, e))?,
    };
    if req.timings {
        let ms = (start.elapsed().as_secs_f64() * 1e6).round() / 1e3;
        for e in &mut entries {
            e.runtime_ms = Some(ms);
        }
    }
    Ok(entries)
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn closed_forms(req: &ReportRequest) -> Result<Vec<Entry>, Error> {
    let g = &req.graph;
    let mut out = Vec::new();
    match g.family() {
        Some(&Family::Hamming { n }) => {
            let v = Value::Exact(formulas::hamming_identity_value(n)?);
            let kind = if req.target == TargetSpec::SelfMetric {
                Kind::Upper
            } else {
                Kind::Reference
            };
            out.push(Entry::new("hamming-identity", kind, &v, "closed-form").with("n", n));
        }
        Some(&Family::TreeBall { d, r }) if d >= 3 => {
            let lo = Value::Exact(formulas::tree_path_lower_bound(d, r)?);
            let hi = Value::Exact(formulas::tree_cut_upper_bound(d, r)?);
            out.push(Entry::new("tree-lower", Kind::Lower, &lo, "closed-form").with("d", d).with("r", r));
            out.push(Entry::new("tree-upper", Kind::Upper, &hi, "closed-form").with("d", d).with("r", r));
        }
        Some(&Family::Path { n }) => {
            let v = formulas::path_graph_mu1(n)?;
            out.push(Entry::new("path-mu1", Kind::Lower, &v, "closed-form").with("n", n));
        }
        _ => {}
    }
    let n = g.vertex_count();
    let curve = formulas::log_ratio_curve(n)?;
    out.push(
        Entry::new("log-ratio", Kind::Reference, &Value::Approx(curve), "closed-form")
            .with("n", n)
            .with("note", "shape only, up to a universal constant"),
    );
    Ok(out)
}

struct Cut {
    subset: Vec<usize>,
    description: String,
}

/// `m(∅) m(∂S) / (M_S (m(∅) − M_S))`: the two-valued map quotient of `S`.
fn cut_ratio<S: Scalar>(total: &S, boundary: &S, inside: &S) -> S {
    total.clone() * boundary.clone() / (inside.clone() * (total.clone() - inside.clone()))
}

/// Best cut among singletons, hop balls around vertex 0, and (on trees)
/// every edge cut. Ties keep the earliest candidate in that order.
fn best_cut(g: &WeightedGraph) -> Cut {
    if g.is_exact() {
        best_cut_in::<Rational>(g)
    } else {
        best_cut_in::<f64>(g)
    }
}

fn best_cut_in<S: Scalar>(g: &WeightedGraph) -> Cut {
    let n = g.vertex_count();
    let total = g.total_weight_as::<S>();
    let vw = g.vertex_weights_as::<S>();
    let ew = g.edge_weights_as::<S>();

    enum Cand {
        Vertex(usize),
        Ball(usize),
        Subtree(usize),
    }
    let mut best: Option<(S, Cand)> = None;
    let mut offer = |value: S, cand: Cand| {
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, cand));
        }
    };

    for v in 0..n {
        offer(cut_ratio(&total, &vw[v], &vw[v]), Cand::Vertex(v));
    }

    let dist = g.hop_distances(0);
    let radius = dist.iter().copied().max().unwrap_or(0);
    let mut layer_mass = vec![S::zero(); radius + 1];
    for v in 0..n {
        layer_mass[dist[v]] = layer_mass[dist[v]].clone() + vw[v].clone();
    }
    let mut between = vec![S::zero(); radius + 1];
    for (e, w) in g.edges().iter().zip(&ew) {
        let (a, b) = (dist[e.u], dist[e.v]);
        if a != b {
            let r = a.min(b);
            between[r] = between[r].clone() + w.clone();
        }
    }
    let mut inside = S::zero();
    for r in 0..radius {
        inside = inside + layer_mass[r].clone();
        offer(cut_ratio(&total, &between[r], &inside), Cand::Ball(r));
    }

    let parent = bfs_parents(g);
    if g.is_tree() {
        let order = bfs_order(g);
        let mut mass = vw.clone();
        for &v in order.iter().rev() {
            if let Some(p) = parent[v] {
                mass[p] = mass[p].clone() + mass[v].clone();
            }
        }
        for v in 1..n {
            let p = parent[v].expect("non-root vertices have parents");
            let e = g.edge_index(p, v).expect("tree edge");
            offer(cut_ratio(&total, &ew[e], &mass[v]), Cand::Subtree(v));
        }
    }

    let (_, cand) = best.expect("n ≥ 2");
    match cand {
        Cand::Vertex(v) => Cut {
            subset: vec![v],
            description: format!("vertex {v}"),
        },
        Cand::Ball(r) => Cut {
            subset: (0..n).filter(|&v| dist[v] <= r).collect(),
            description: format!("ball 0 radius {r}"),
        },
        Cand::Subtree(v) => {
            let mut subset = vec![];
            for x in 0..n {
                let mut y = x;
                loop {
                    if y == v {
                        subset.push(x);
                        break;
                    }
                    match parent[y] {
                        Some(p) => y = p,
                        None => break,
                    }
                }
            }
            Cut {
                subset,
                description: format!("edge {}-{v}", parent[v].unwrap()),
            }
        }
    }
}

fn bfs_order(g: &WeightedGraph) -> Vec<usize> {
    let mut seen = vec![false; g.vertex_count()];
    let mut order = vec![0];
    seen[0] = true;
    let mut i = 0;
    while i < order.len() {
        let x = order[i];
        for &(y, _) in g.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                order.push(y);
            }
        }
        i += 1;
    }
    order
}

fn bfs_parents(g: &WeightedGraph) -> Vec<Option<usize>> {
    let mut parent = vec![None; g.vertex_count()];
    let mut seen = vec![false; g.vertex_count()];
    seen[0] = true;
    for x in bfs_order(g) {
        for &(y, _) in g.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some(x);
            }
        }
    }
    parent
}

/// `a ≤ b`, exactly when both are exact and within [`SANDWICH_TOLERANCE`]
/// otherwise.
fn at_most(a: &Entry, b: &Entry) -> bool {
    match (a.value(), b.value()) {
        (Value::Exact(x), Value::Exact(y)) => x <= y,
        (x, y) => x.to_f64() <= y.to_f64() + SANDWICH_TOLERANCE,
    }
}

/// Every lower entry is at most every exact and upper entry, and every exact
/// entry is at most every upper entry.
pub fn check_sandwich(entries: &[Entry]) -> Result<(), ReportError> {
    let rank = |k: Kind| match k {
        Kind::Lower => Some(0),
        Kind::Exact => Some(1),
        Kind::Upper => Some(2),
        Kind::Reference => None,
    };
    for a in entries {
        for b in entries {
            let (Some(ra), Some(rb)) = (rank(a.kind), rank(b.kind)) else {
                continue;
            };
            if ra < rb && !at_most(a, b) {
                return Err(ReportError::InconsistentBounds {
                    lower: a.name.clone(),
                    upper: b.name.clone(),
                    detail: format!("{} vs {}", a.decimal, b.decimal),
                });
            }
        }
    }
    Ok(())
}

/// Runs every requested estimator (concurrently), in request order, and
/// checks consistency before returning.
pub fn run_report(req: &ReportRequest) -> Result<BoundReport, ReportError> {
    let space = req.target.space(&req.graph).map_err(|e| entry_error("target", e))?;
    let bounds: Vec<BoundSpec> = req
        .bounds
        .iter()
        .copied()
        .filter(|&b| !req.skip_inapplicable || applicable(req, b, space.len()))
        .collect();
    let results: Vec<Result<Vec<Entry>, ReportError>> =
        bounds.par_iter().map(|&b| compute(req, &space, b)).collect();
    let mut entries = Vec::new();
    for r in results {
        entries.extend(r?);
    }
    check_sandwich(&entries)?;
    let seeds = if bounds.contains(&BoundSpec::GapSearch) {
        vec![req.search.seed]
    } else {
        vec![]
    };
    Ok(BoundReport {
        schema: SCHEMA_VERSION,
        tool: TOOL_NAME.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        graph: req.descriptor.clone(),
        target: req.target.descriptor(space.len()),
        seeds,
        entries,
    })
}

pub fn emit_json(report: &BoundReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<BoundReport, ReportError> {
    serde_json::from_str(text).map_err(|e| ReportError::Parse(e.to_string()))
}

pub const CSV_HEADER: [&str; 7] = ["name", "kind", "exact", "decimal", "method", "parameters", "runtime_ms"];

/// One row per entry. Parameters are `key=value` joined by `;`.
pub fn emit_csv(report: &BoundReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for e in &report.entries {
        let params: Vec<String> = e.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        w.write_record([
            e.name.clone(),
            e.kind.as_str().to_string(),
            e.exact.clone().unwrap_or_default(),
            e.decimal.to_string(),
            e.method.clone(),
            params.join(";"),
            e.runtime_ms.map(|t| t.to_string()).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_cycle, gen_hamming, gen_path, gen_random_regular, gen_tree_ball};
    use crate::number::ratio;

    fn request(g: WeightedGraph, target: TargetSpec) -> ReportRequest {
        let d = GraphDescriptor::generated(&g);
        ReportRequest::new(g, d, target)
    }

    fn find<'a>(r: &'a BoundReport, name: &str) -> &'a Entry {
        r.entries.iter().find(|e| e.name == name).unwrap_or_else(|| panic!("no entry {name}"))
    }

    #[test]
    fn hamming_square_against_itself() {
        let r = run_report(&request(gen_hamming(2).unwrap(), TargetSpec::SelfMetric)).unwrap();
        assert!((find(&r, "mu1").decimal - 1.0).abs() < 1e-9);
        assert_eq!(find(&r, "identity").exact.as_deref(), Some("2/3"));
        assert_eq!(find(&r, "hamming-identity").exact.as_deref(), Some("2/3"));
        let exact = find(&r, "gap-exact").value();
        assert!(exact.compare(&Value::from(ratio(2, 3))).unwrap().is_le());
        assert_eq!(find(&r, "path-bound").kind, Kind::Lower);
        assert_eq!(r.schema, 1);
    }

    #[test]
    fn star_with_two_points() {
        let r = run_report(&request(gen_tree_ball(3, 1).unwrap(), TargetSpec::TwoPoint(Value::from(1)))).unwrap();
        assert_eq!(find(&r, "tree-lower").exact.as_deref(), Some("1/72"));
        assert_eq!(find(&r, "cut").exact.as_deref(), Some("6/5"));
        assert_eq!(find(&r, "path-bound").exact.as_deref(), Some("6/7"));
        assert_eq!(find(&r, "gap-exact").exact.as_deref(), Some("6/5"));
        let mu = find(&r, "mu1");
        assert_eq!(mu.kind, Kind::Lower);
        assert!((mu.decimal - 1.0).abs() < 1e-9);
        assert!(r.entries.iter().all(|e| e.name != "identity"));
    }

    #[test]
    fn path_graph_with_metric_target() {
        let x = FiniteMetricSpace::from_integers(vec![vec![0, 2, 3], vec![2, 0, 4], vec![3, 4, 0]]).unwrap();
        let r = run_report(&request(
            gen_path(3).unwrap(),
            TargetSpec::Metric {
                space: x,
                label: "inline".into(),
            },
        ))
        .unwrap();
        let lower = find(&r, "path-mu1");
        assert_eq!(lower.exact.as_deref(), Some("1/2"));
        assert!(at_most(lower, find(&r, "gap-exact")));
        assert_eq!(find(&r, "mu1").kind, Kind::Reference);
    }

    #[test]
    fn best_cut_matches_direct_quotient_and_tree_formula() {
        for (d, r) in [(3, 1), (3, 2), (4, 2), (5, 3)] {
            let t = gen_tree_ball(d, r).unwrap();
            let cut = best_cut(&t);
            let q = gap::cut_quotient(&t, &cut.subset, 1).unwrap();
            assert_eq!(q.ratio, Value::Exact(formulas::tree_cut_upper_bound(d, r).unwrap()), "d={d} r={r}");
        }
        let g = gen_random_regular(12, 3, 4).unwrap();
        let cut = best_cut_in::<Rational>(&g);
        let direct = gap::cut_quotient(&g, &cut.subset, 1).unwrap();
        let total = g.total_weight_as::<Rational>();
        let inside: Rational = cut.subset.iter().map(|&v| g.vertex_weights_as::<Rational>()[v].clone()).sum();
        let mut boundary = Rational::from_integer(0.into());
        for (i, e) in g.edges().iter().enumerate() {
            if cut.subset.contains(&e.u) != cut.subset.contains(&e.v) {
                boundary += g.edge_weight(i).as_exact().unwrap();
            }
        }
        assert_eq!(direct.ratio, Value::Exact(cut_ratio(&total, &boundary, &inside)));
    }

    #[test]
    fn inapplicable_bounds_are_skipped_or_rejected() {
        let big = gen_cycle(40).unwrap();
        let r = run_report(&request(big.clone(), TargetSpec::SelfMetric)).unwrap();
        assert!(r.entries.iter().all(|e| e.name != "gap-exact"));
        let mut req = request(big, TargetSpec::SelfMetric);
        req.bounds = vec![BoundSpec::GapExact];
        req.skip_inapplicable = false;
        let err = run_report(&req).unwrap_err();
        assert_eq!(Error::from(err.clone()).exit_code(), 3);
        assert!(matches!(err, ReportError::Entry { ref entry, .. } if entry == "gap-exact"));

        let mut req = request(gen_path(2).unwrap(), TargetSpec::TwoPoint(Value::from(1)));
        req.bounds = vec![BoundSpec::Identity];
        req.skip_inapplicable = false;
        assert!(run_report(&req).is_err());
    }

    #[test]
    fn sandwich_violation_is_reported() {
        let lo = Entry::new("lo", Kind::Lower, &Value::from(2), "x");
        let hi = Entry::new("hi", Kind::Upper, &Value::from(1), "x");
        let re = Entry::new("re", Kind::Reference, &Value::from(100), "x");
        assert!(matches!(
            check_sandwich(&[lo.clone(), hi.clone(), re.clone()]),
            Err(ReportError::InconsistentBounds { .. })
        ));
        assert!(check_sandwich(&[hi, re.clone()]).is_ok());
        let close = Entry::new("c", Kind::Upper, &Value::Approx(2.0 - 1e-12), "x");
        assert!(check_sandwich(&[lo.clone(), close]).is_ok());
        let exact_close = Entry::new("c", Kind::Upper, &Value::from(ratio(1_999_999_999_999, 1_000_000_000_000)), "x");
        assert!(check_sandwich(&[lo, exact_close]).is_err());
    }

    #[test]
    fn emission_is_stable_and_round_trips() {
        let mut req = request(gen_hamming(2).unwrap(), TargetSpec::SelfMetric);
        req.search.seed = 5;
        let a = run_report(&req).unwrap();
        let b = run_report(&req).unwrap();
        assert_eq!(emit_json(&a), emit_json(&b));
        assert_eq!(emit_csv(&a), emit_csv(&b));
        let json = emit_json(&a);
        assert_eq!(emit_json(&parse_json(&json).unwrap()), json);
        assert_eq!(a.seeds, vec![5]);
        assert!(json.contains("\"schema\": 1"));
    }

    #[test]
    fn empty_report_emits_valid_documents() {
        let g = gen_path(2).unwrap();
        let mut req = request(g, TargetSpec::TwoPoint(Value::from(1)));
        req.bounds.clear();
        let r = run_report(&req).unwrap();
        assert!(r.entries.is_empty());
        let json = emit_json(&r);
        assert_eq!(parse_json(&json).unwrap(), r);
        let csv = emit_csv(&r);
        assert_eq!(csv.lines().count(), 1);
        assert!(csv.starts_with("name,kind,exact,decimal"));
    }

    #[test]
    fn timings_are_opt_in() {
        let g = gen_path(3).unwrap();
        let mut req = request(g, TargetSpec::TwoPoint(Value::from(1)));
        assert!(run_report(&req).unwrap().entries.iter().all(|e| e.runtime_ms.is_none()));
        req.timings = true;
        assert!(run_report(&req).unwrap().entries.iter().all(|e| e.runtime_ms.is_some()));
    }
}
