//! Deterministic generators for the graph families used throughout the crate.
//!
//! Vertex labelling is fixed: Hamming cubes by bitstring value, tree balls in
//! level order with the center at 0, paths and cycles in chain order.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Family, GraphError, WeightedGraph};

/// Default cap on generated vertex counts.
pub const DEFAULT_SIZE_CAP: usize = 1 << 20;

/// Environment variable overriding [`DEFAULT_SIZE_CAP`].
pub const SIZE_CAP_ENV: &str = "SGT_SIZE_CAP";

const DEFAULT_PAIRING_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Generators {
    pub size_cap: usize,
    pub pairing_attempts: usize,
}

impl Default for Generators {
    fn default() -> Self {
        Generators {
            size_cap: DEFAULT_SIZE_CAP,
            pairing_attempts: DEFAULT_PAIRING_ATTEMPTS,
        }
    }
}

impl Generators {
    /// Reads the size cap from `SGT_SIZE_CAP`, falling back to the default.
    pub fn from_env() -> Self {
        let size_cap = std::env::var(SIZE_CAP_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_SIZE_CAP);
        Generators {
            size_cap,
            ..Default::default()
        }
    }

    fn check_cap(&self, what: &str, size: u128) -> Result<usize, GraphError> {
        if size > self.size_cap as u128 {
            return Err(GraphError::SizeCapExceeded {
                what: what.to_string(),
                size,
                cap: self.size_cap,
            });
        }
        Ok(size as usize)
    }

    /// The `n`-dimensional Hamming cube on `2^n` bitstrings.
    pub fn hamming(&self, n: usize) -> Result<WeightedGraph, GraphError> {
        if n == 0 {
            return Err(GraphError::RejectTooSmall(1));
        }
        let size = if n >= 127 { u128::MAX } else { 1u128 << n };
        let count = self.check_cap(&format!("hamming cube H_{n}"), size)?;
        let mut edges = Vec::with_capacity(count * n / 2);
        for x in 0..count {
            for bit in 0..n {
                let y = x ^ (1 << bit);
                if x < y {
                    edges.push((x, y));
                }
            }
        }
        Ok(WeightedGraph::uniform(count, edges)?.with_family(Family::Hamming { n }))
    }

    /// The radius-`r` ball around a vertex of the `d`-regular tree.
    pub fn tree_ball(&self, d: usize, r: usize) -> Result<WeightedGraph, GraphError> {
        if d < 2 {
            return Err(GraphError::InvalidParameters(format!(
                "tree ball degree must be at least 2, got {d}"
            )));
        }
        if r == 0 {
            return Err(GraphError::RejectTooSmall(1));
        }
        // 1 + Σ_{l=1}^r d(d-1)^{l-1}, saturating on overflow.
        let mut size: u128 = 1;
        let mut layer: u128 = d as u128;
        for _ in 0..r {
            size = size.saturating_add(layer);
            layer = layer.saturating_mul((d - 1) as u128);
        }
        let count = self.check_cap(&format!("tree ball T_{{{d},{r}}}"), size)?;

        let mut levels = Vec::with_capacity(count);
        let mut edges = Vec::with_capacity(count - 1);
        levels.push(0);
        let mut frontier = vec![0usize];
        for level in 1..=r {
            let mut next = Vec::new();
            for &parent in &frontier {
                let children = if parent == 0 { d } else { d - 1 };
                for _ in 0..children {
                    let child = levels.len();
                    levels.push(level);
                    edges.push((parent, child));
                    next.push(child);
                }
            }
            frontier = next;
        }
        debug_assert_eq!(levels.len(), count);
        Ok(WeightedGraph::uniform(count, edges)?
            .with_family(Family::TreeBall { d, r })
            .with_levels(levels))
    }

    /// The path with `n` edges, vertices `v_0..v_n` in chain order.
    pub fn path(&self, n: usize) -> Result<WeightedGraph, GraphError> {
        if n == 0 {
            return Err(GraphError::RejectTooSmall(1));
        }
        let count = self.check_cap(&format!("path P_{n}"), n as u128 + 1)?;
        Ok(WeightedGraph::uniform(count, (0..n).map(|i| (i, i + 1)))?
            .with_family(Family::Path { n }))
    }

    pub fn cycle(&self, n: usize) -> Result<WeightedGraph, GraphError> {
        if n < 3 {
            return Err(GraphError::InvalidParameters(format!(
                "cycle needs at least 3 vertices, got {n}"
            )));
        }
        let count = self.check_cap(&format!("cycle C_{n}"), n as u128)?;
        Ok(
            WeightedGraph::uniform(count, (0..n).map(|i| (i, (i + 1) % n)))?
                .with_family(Family::Cycle { n }),
        )
    }

    pub fn complete(&self, n: usize) -> Result<WeightedGraph, GraphError> {
        if n < 2 {
            return Err(GraphError::RejectTooSmall(n));
        }
        let count = self.check_cap(&format!("complete graph K_{n}"), n as u128)?;
        let edges = (0..count).flat_map(|u| (u + 1..count).map(move |v| (u, v)));
        Ok(WeightedGraph::uniform(count, edges)?.with_family(Family::Complete { n }))
    }

    /// Random `d`-regular graph on `n` vertices from the pairing model.
    ///
    /// Outcomes with loops, repeated edges or more than one component are
    /// rejected and redrawn from the same stream. Edges are returned sorted.
    pub fn random_regular(&self, n: usize, d: usize, seed: u64) -> Result<WeightedGraph, GraphError> {
        if d == 0 || d >= n || (n * d) % 2 != 0 {
            return Err(GraphError::InvalidParameters(format!(
                "random regular graph needs 0 < d < n and n*d even (n={n}, d={d})"
            )));
        }
        let count = self.check_cap(&format!("random {d}-regular graph"), n as u128)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut stubs: Vec<usize> = (0..count).flat_map(|x| std::iter::repeat(x).take(d)).collect();

        'attempt: for _ in 0..self.pairing_attempts {
            stubs.shuffle(&mut rng);
            let mut seen = HashSet::with_capacity(stubs.len() / 2);
            let mut edges = Vec::with_capacity(stubs.len() / 2);
            for pair in stubs.chunks_exact(2) {
                let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                if a == b || !seen.insert((a, b)) {
                    continue 'attempt;
                }
                edges.push((a, b));
            }
            edges.sort_unstable();
            match WeightedGraph::uniform(count, edges) {
                Ok(g) => return Ok(g.with_family(Family::RandomRegular { n, d, seed })),
                Err(GraphError::RejectDisconnected(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(GraphError::PairingFailed(self.pairing_attempts))
    }
}

pub fn gen_hamming(n: usize) -> Result<WeightedGraph, GraphError> {
    Generators::default().hamming(n)
}

pub fn gen_tree_ball(d: usize, r: usize) -> Result<WeightedGraph, GraphError> {
    Generators::default().tree_ball(d, r)
}

pub fn gen_path(n: usize) -> Result<WeightedGraph, GraphError> {
    Generators::default().path(n)
}

pub fn gen_cycle(n: usize) -> Result<WeightedGraph, GraphError> {
    Generators::default().cycle(n)
}

pub fn gen_complete(n: usize) -> Result<WeightedGraph, GraphError> {
    Generators::default().complete(n)
}

pub fn gen_random_regular(n: usize, d: usize, seed: u64) -> Result<WeightedGraph, GraphError> {
    Generators::default().random_regular(n, d, seed)
}
