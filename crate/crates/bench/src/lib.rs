//! Shared fixtures for the benchmarks.

use sgt_core::{gen_hamming, gen_tree_ball, graph_metric_space, two_point_space, FiniteMetricSpace, WeightedGraph};

pub fn cube(n: usize) -> WeightedGraph {
    gen_hamming(n).expect("small cube")
}

pub fn tree(d: usize, r: usize) -> WeightedGraph {
    gen_tree_ball(d, r).expect("small tree ball")
}

pub fn self_metric(g: &WeightedGraph) -> FiniteMetricSpace {
    graph_metric_space(g)
}

pub fn unit_pair() -> FiniteMetricSpace {
    two_point_space(1).expect("positive distance")
}
