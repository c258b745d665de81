//! Poincaré quotients and the nonlinear spectral gap `λ(G, X)`.
//!
//! For `f: V → X` the quotient is
//!
//! ```text
//!        Σ_{x,y} m(x,y) d(fx, fy)²
//! Q(f) = ------------------------------------
//!        (1/m(∅)) Σ_{x,y} m(x) m(y) d(fx, fy)²
//! ```
//!
//! with both sums over all ordered pairs, and `λ(G, X)` is its minimum over
//! non-constant maps. For a finite `X` the minimum is attained, so it can be
//! found by enumerating all `k^n` maps. [`gap_search`] gives an upper bound by
//! coordinate descent when enumeration is too expensive.
//!
//! Evaluation regroups both sums: the numerator runs over edges, and the
//! denominator over point pairs weighted by the vertex mass `M_p` that `f`
//! puts on each point.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::WeightedGraph;
use crate::metric::{graph_metric_space, two_point_space, FiniteMetricSpace, MetricError, PointMap};
use crate::number::{Rational, Scalar, Value};

/// Default limit on `k^n` for [`gap_exact`].
pub const DEFAULT_MAP_CAP: u128 = 10_000_000;

/// Relative slack used when screening candidates in floating point before an
/// exact comparison.
const SCREEN_SLACK: f64 = 1e-9;

const MIN_CHUNK: u128 = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GapError {
    #[error("map is constant; the quotient is undefined")]
    ConstantMap,
    #[error("exhaustive search over {size} maps exceeds the cap {cap}")]
    SearchSpaceTooLarge { size: String, cap: u128 },
    #[error("cut subset must be a proper nonempty subset of the vertices")]
    EmptyOrFullSubset,
    #[error("subset vertex {0} is out of range")]
    SubsetOutOfRange(usize),
    #[error("local search needs at least one restart")]
    NoRestarts,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientValue {
    pub numerator: Value,
    pub denominator: Value,
    pub ratio: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exhaustive,
    LocalSearch,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exhaustive => "exhaustive",
            Method::LocalSearch => "local_search",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapResult {
    pub value: Value,
    pub numerator: Value,
    pub denominator: Value,
    pub witness: Vec<usize>,
    pub method: Method,
    /// Maps (exhaustive) or candidate moves (local search) evaluated.
    pub maps_examined: u128,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
}

/// Precomputed data for evaluating quotients in scalar type `S`.
struct Evaluator<S> {
    k: usize,
    /// `(u, v, 2·m(u,v))`: both orientations folded together.
    edges: Vec<(usize, usize, S)>,
    /// Per vertex: `(neighbour, 2·m(e))`.
    adjacency: Vec<Vec<(usize, S)>>,
    vertex_weights: Vec<S>,
    total: S,
    /// Row-major squared distances.
    d2: Vec<S>,
}

impl<S: Scalar> Evaluator<S> {
    fn new(graph: &WeightedGraph, space: &FiniteMetricSpace) -> Self {
        let two = S::one() + S::one();
        let ew = graph.edge_weights_as::<S>();
        let edges: Vec<_> = graph
            .edges()
            .iter()
            .zip(ew)
            .map(|(e, w)| (e.u, e.v, two.clone() * w))
            .collect();
        let mut adjacency = vec![Vec::new(); graph.vertex_count()];
        for (u, v, w2) in &edges {
            adjacency[*u].push((*v, w2.clone()));
            adjacency[*v].push((*u, w2.clone()));
        }
        Evaluator {
            k: space.len(),
            edges,
            adjacency,
            vertex_weights: graph.vertex_weights_as(),
            total: graph.total_weight_as(),
            d2: space.squared_distances(),
        }
    }

    fn d2(&self, p: usize, q: usize) -> &S {
        &self.d2[p * self.k + q]
    }

    fn numerator(&self, f: &[usize]) -> S {
        self.edges
            .iter()
            .fold(S::zero(), |acc, (u, v, w2)| acc + w2.clone() * self.d2(f[*u], f[*v]).clone())
    }

    /// `Σ_{p,q} M_p M_q d²(p,q)` for the masses `f` puts on points.
    fn mass_form(&self, f: &[usize], mass: &mut [S]) -> S {
        for m in mass.iter_mut() {
            *m = S::zero();
        }
        for (x, &p) in f.iter().enumerate() {
            mass[p] = mass[p].clone() + self.vertex_weights[x].clone();
        }
        let mut t = S::zero();
        for p in 0..self.k {
            if mass[p].is_zero() {
                continue;
            }
            for q in p + 1..self.k {
                if mass[q].is_zero() {
                    continue;
                }
                t = t + mass[p].clone() * mass[q].clone() * self.d2(p, q).clone();
            }
        }
        t.clone() + t
    }

    /// `(numerator, denominator)`, or `None` for a constant map.
    fn evaluate(&self, f: &[usize], mass: &mut [S]) -> Option<(S, S)> {
        let t = self.mass_form(f, mass);
        if t.is_zero() {
            return None;
        }
        Some((self.numerator(f), t / self.total.clone()))
    }
}

fn validate_map(graph: &WeightedGraph, space: &FiniteMetricSpace, map: &[usize]) -> Result<(), GapError> {
    PointMap::new(map.to_vec(), graph.vertex_count(), space.len())?;
    Ok(())
}

fn exact_mode(graph: &WeightedGraph, space: &FiniteMetricSpace) -> bool {
    graph.is_exact() && space.is_exact()
}

fn quotient_in<S: Scalar>(
    graph: &WeightedGraph,
    space: &FiniteMetricSpace,
    map: &[usize],
) -> Result<QuotientValue, GapError> {
    let ev = Evaluator::<S>::new(graph, space);
    let mut mass = vec![S::zero(); space.len()];
    let (num, den) = ev.evaluate(map, &mut mass).ok_or(GapError::ConstantMap)?;
    Ok(QuotientValue {
        ratio: (num.clone() / den.clone()).into_value(),
        numerator: num.into_value(),
        denominator: den.into_value(),
    })
}

/// The Poincaré quotient of `map: V → X`. Exact when both the graph and the
/// space are exact.
pub fn poincare_quotient(
    graph: &WeightedGraph,
    space: &FiniteMetricSpace,
    map: &[usize],
) -> Result<QuotientValue, GapError> {
    validate_map(graph, space, map)?;
    if exact_mode(graph, space) {
        quotient_in::<Rational>(graph, space, map)
    } else {
        quotient_in::<f64>(graph, space, map)
    }
}

/// Quotient of the identity map into the graph's own hop metric; an upper
/// bound on `λ(G, graph_metric_space(G))`.
pub fn identity_upper_bound(graph: &WeightedGraph) -> QuotientValue {
    let space = graph_metric_space(graph);
    let id: Vec<usize> = (0..graph.vertex_count()).collect();
    poincare_quotient(graph, &space, &id).expect("identity is non-constant on n ≥ 2 vertices")
}

/// Quotient of the two-valued map sending `subset` to one point and its
/// complement to another, at distance `delta`. Independent of `delta`.
pub fn cut_quotient(graph: &WeightedGraph, subset: &[usize], delta: impl Into<Value>) -> Result<QuotientValue, GapError> {
    let n = graph.vertex_count();
    let mut map = vec![0usize; n];
    for &v in subset {
        if v >= n {
            return Err(GapError::SubsetOutOfRange(v));
        }
        map[v] = 1;
    }
    let inside = map.iter().filter(|&&p| p == 1).count();
    if inside == 0 || inside == n {
        return Err(GapError::EmptyOrFullSubset);
    }
    let space = two_point_space(delta)?;
    poincare_quotient(graph, &space, &map)
}

fn map_count(k: usize, n: usize) -> Option<u128> {
    (k as u128).checked_pow(n as u32)
}

fn decode(mut index: u128, k: usize, out: &mut [usize]) {
    for digit in out.iter_mut() {
        *digit = (index % k as u128) as usize;
        index /= k as u128;
    }
}

/// Mixed-radix increment with vertex 0 as the least significant digit.
fn advance(map: &mut [usize], k: usize) {
    for digit in map.iter_mut() {
        *digit += 1;
        if *digit < k {
            return;
        }
        *digit = 0;
    }
}

/// Best map in a chunk: `(f64 ratio, exact ratio when screening, index)`.
struct ChunkBest {
    ratio: f64,
    exact: Option<Rational>,
    index: u128,
}

fn scan_chunk(
    fast: &Evaluator<f64>,
    exact: Option<&Evaluator<Rational>>,
    n: usize,
    start: u128,
    end: u128,
) -> Option<ChunkBest> {
    let k = fast.k;
    let mut map = vec![0usize; n];
    decode(start, k, &mut map);
    let mut mass = vec![0.0; k];
    let mut exact_mass = vec![Rational::zero(); k];
    let mut best: Option<ChunkBest> = None;

    for index in start..end {
        if let Some((num, den)) = fast.evaluate(&map, &mut mass) {
            let ratio = num / den;
            match (exact, &mut best) {
                (_, None) => {
                    let exact_ratio = exact.map(|ev| {
                        let (a, b) = ev.evaluate(&map, &mut exact_mass).expect("non-constant");
                        a / b
                    });
                    best = Some(ChunkBest {
                        ratio,
                        exact: exact_ratio,
                        index,
                    });
                }
                (None, Some(b)) => {
                    if ratio < b.ratio {
                        *b = ChunkBest { ratio, exact: None, index };
                    }
                }
                (Some(ev), Some(b)) => {
                    if ratio <= b.ratio * (1.0 + SCREEN_SLACK) {
                        let (a, d) = ev.evaluate(&map, &mut exact_mass).expect("non-constant");
                        let q = a / d;
                        if q < *b.exact.as_ref().unwrap() {
                            *b = ChunkBest {
                                ratio,
                                exact: Some(q),
                                index,
                            };
                        }
                    }
                }
            }
        }
        advance(&mut map, k);
    }
    best
}

fn better(a: &ChunkBest, b: &ChunkBest) -> bool {
    let ord = match (&a.exact, &b.exact) {
        (Some(x), Some(y)) => x.cmp(y),
        _ => a.ratio.total_cmp(&b.ratio),
    };
    ord.then(a.index.cmp(&b.index)).is_lt()
}

/// `λ(G, X)` by exhaustive enumeration of all `k^n` maps. The witness is the
/// first minimiser in mixed-radix order (vertex 0 least significant).
pub fn gap_exact(graph: &WeightedGraph, space: &FiniteMetricSpace, cap: u128) -> Result<GapResult, GapError> {
    let n = graph.vertex_count();
    let k = space.len();
    let total = match map_count(k, n) {
        Some(t) if t <= cap => t,
        Some(t) => {
            return Err(GapError::SearchSpaceTooLarge {
                size: t.to_string(),
                cap,
            })
        }
        None => {
            return Err(GapError::SearchSpaceTooLarge {
                size: format!("{k}^{n}"),
                cap,
            })
        }
    };

    let fast = Evaluator::<f64>::new(graph, space);
    let exact = exact_mode(graph, space).then(|| Evaluator::<Rational>::new(graph, space));
    let chunk = (total / (4 * rayon::current_num_threads() as u128).max(1)).max(MIN_CHUNK);
    let chunks = total.div_ceil(chunk);

    let best = (0..chunks as u64)
        .into_par_iter()
        .filter_map(|c| {
            let start = c as u128 * chunk;
            let end = (start + chunk).min(total);
            scan_chunk(&fast, exact.as_ref(), n, start, end)
        })
        .reduce_with(|a, b| if better(&b, &a) { b } else { a })
        .expect("k ≥ 2 and n ≥ 2 admit non-constant maps");

    let mut witness = vec![0usize; n];
    decode(best.index, k, &mut witness);
    let q = if exact.is_some() {
        quotient_in::<Rational>(graph, space, &witness)?
    } else {
        quotient_in::<f64>(graph, space, &witness)?
    };
    Ok(GapResult {
        value: q.ratio,
        numerator: q.numerator,
        denominator: q.denominator,
        witness,
        method: Method::Exhaustive,
        maps_examined: total - k as u128,
        seed: None,
        restarts: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub seed: u64,
    pub restarts: usize,
    pub max_sweeps: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            seed: 0,
            restarts: 8,
            max_sweeps: 100,
        }
    }
}

/// Running state for single-vertex moves.
struct SearchState<'a, S> {
    ev: &'a Evaluator<S>,
    map: Vec<usize>,
    counts: Vec<usize>,
    numerator: S,
    /// `M_p`.
    mass: Vec<S>,
    /// `g_a = Σ_b d²(a,b) M_b`.
    field: Vec<S>,
    /// `Σ_a M_a g_a`.
    form: S,
}

impl<'a, S: Scalar> SearchState<'a, S> {
    fn new(ev: &'a Evaluator<S>, map: Vec<usize>) -> Self {
        let k = ev.k;
        let mut mass = vec![S::zero(); k];
        let form = ev.mass_form(&map, &mut mass);
        let field = (0..k)
            .map(|a| {
                (0..k).fold(S::zero(), |acc, b| acc + ev.d2(a, b).clone() * mass[b].clone())
            })
            .collect();
        let mut counts = vec![0; k];
        for &p in &map {
            counts[p] += 1;
        }
        SearchState {
            numerator: ev.numerator(&map),
            ev,
            map,
            counts,
            mass,
            field,
            form,
        }
    }

    /// `(numerator, mass form)` after moving `v` to `q`.
    fn candidate(&self, v: usize, q: usize) -> (S, S) {
        let p = self.map[v];
        if p == q {
            return (self.numerator.clone(), self.form.clone());
        }
        let ev = self.ev;
        let mut num = self.numerator.clone();
        for (u, w2) in &ev.adjacency[v] {
            let fu = self.map[*u];
            num = num + w2.clone() * (ev.d2(q, fu).clone() - ev.d2(p, fu).clone());
        }
        let mv = ev.vertex_weights[v].clone();
        let two = S::one() + S::one();
        let form = self.form.clone() + two.clone() * mv.clone() * (self.field[q].clone() - self.field[p].clone())
            - two * mv.clone() * mv * ev.d2(p, q).clone();
        (num, form)
    }

    fn apply(&mut self, v: usize, q: usize, num: S, form: S) {
        let p = self.map[v];
        let ev = self.ev;
        let mv = ev.vertex_weights[v].clone();
        for a in 0..ev.k {
            self.field[a] = self.field[a].clone() + mv.clone() * (ev.d2(a, q).clone() - ev.d2(a, p).clone());
        }
        self.mass[p] = self.mass[p].clone() - mv.clone();
        self.mass[q] = self.mass[q].clone() + mv;
        self.counts[p] -= 1;
        self.counts[q] += 1;
        self.map[v] = q;
        self.numerator = num;
        self.form = form;
    }
}

/// `a/b < c/d` for positive denominators.
fn ratio_less<S: Scalar>(a: &(S, S), b: &(S, S)) -> bool {
    a.0.clone() * b.1.clone() < b.0.clone() * a.1.clone()
}

fn descend<S: Scalar>(ev: &Evaluator<S>, start: Vec<usize>, max_sweeps: usize) -> (Vec<usize>, u128) {
    let n = start.len();
    let mut state = SearchState::new(ev, start);
    let mut evaluations = 0u128;
    for _ in 0..max_sweeps {
        let mut changed = false;
        for v in 0..n {
            let current = state.map[v];
            let mut best: Option<(usize, (S, S))> = None;
            for q in 0..ev.k {
                if q != current && state.counts[q] == n - 1 {
                    continue; // would make the map constant
                }
                let cand = state.candidate(v, q);
                evaluations += 1;
                if best.as_ref().is_none_or(|(_, b)| ratio_less(&cand, b)) {
                    best = Some((q, cand));
                }
            }
            let (q, (num, form)) = best.expect("current point is always admissible");
            if q != current {
                state.apply(v, q, num, form);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (state.map, evaluations)
}

fn random_start(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    loop {
        let map: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        if map.iter().any(|&p| p != map[0]) {
            return map;
        }
    }
}

fn search_in<S: Scalar>(
    graph: &WeightedGraph,
    space: &FiniteMetricSpace,
    opts: &SearchOptions,
) -> Result<GapResult, GapError> {
    let n = graph.vertex_count();
    let k = space.len();
    let ev = Evaluator::<S>::new(graph, space);
    let runs: Vec<(Vec<usize>, u128, (S, S))> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(r as u64);
            let start = random_start(&mut rng, n, k);
            let (map, evals) = descend(&ev, start, opts.max_sweeps);
            let mut mass = vec![S::zero(); k];
            let q = ev.evaluate(&map, &mut mass).expect("search never reaches a constant map");
            (map, evals, q)
        })
        .collect();

    let mut best = 0;
    for (i, run) in runs.iter().enumerate().skip(1) {
        if ratio_less(&run.2, &runs[best].2) {
            best = i;
        }
    }
    let evaluations = runs.iter().map(|r| r.1).sum();
    let (witness, _, (num, den)) = runs.into_iter().nth(best).unwrap();
    Ok(GapResult {
        value: (num.clone() / den.clone()).into_value(),
        numerator: num.into_value(),
        denominator: den.into_value(),
        witness,
        method: Method::LocalSearch,
        maps_examined: evaluations,
        seed: Some(opts.seed),
        restarts: Some(opts.restarts),
    })
}

/// Upper bound on `λ(G, X)` by coordinate-descent local search.
///
/// Each restart starts from a random non-constant map and sweeps vertices in
/// index order, moving each to the point that minimises the quotient with
/// the rest fixed (ties to the smallest point index), until a sweep changes
/// nothing or `max_sweeps` is reached. Restart `r` draws from stream `r` of a
/// ChaCha generator seeded with `seed`, so results do not depend on thread
/// count or on how many further restarts follow.
pub fn gap_search(graph: &WeightedGraph, space: &FiniteMetricSpace, opts: &SearchOptions) -> Result<GapResult, GapError> {
    if opts.restarts == 0 {
        return Err(GapError::NoRestarts);
    }
    if exact_mode(graph, space) {
        search_in::<Rational>(graph, space, opts)
    } else {
        search_in::<f64>(graph, space, opts)
    }
}
