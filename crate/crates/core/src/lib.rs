//! Nonlinear spectral gaps of finite weighted graphs.
//!
//! `λ(G, X)` is the best constant in the Poincaré inequality for maps from a
//! graph `G` into a metric space `X`. This crate computes it exactly for
//! small inputs, bounds it from above by local search and explicit maps, and
//! from below by the linear spectral gap and by routing paths. Closed forms
//! for Hamming cubes, paths and tree balls are included for comparison.
//!
//! Exact rational arithmetic is used whenever every input is rational;
//! otherwise values are `f64`.

pub mod error;
pub mod formulas;
pub mod gap;
pub mod generators;
pub mod graph;
pub mod io;
pub mod metric;
pub mod number;
pub mod paths;
pub mod report;
pub mod spectral;

pub use error::{Category, Error};
pub use formulas::ClosedFormValue;
pub use gap::{
    cut_quotient, gap_exact, gap_search, identity_upper_bound, poincare_quotient, GapResult, QuotientValue,
    SearchOptions,
};
pub use generators::{
    gen_complete, gen_cycle, gen_hamming, gen_path, gen_random_regular, gen_tree_ball, Generators,
};
pub use graph::{Edge, Family, WeightedGraph};
pub use metric::{
    distortion_of_map, graph_metric_space, real_points_space, two_point_space, EuclideanConfig,
    FiniteMetricSpace, PointMap,
};
pub use number::{Numbers, Rational, Value};
pub use paths::{congestion, path_method_lower_bound, Congestion, EdgeWeightW, PathAssignment};
pub use report::{emit_csv, emit_json, run_report, BoundReport, Entry, Kind, ReportRequest, TargetSpec};
pub use spectral::{laplacian_spectrum, mu1, Spectrum};
