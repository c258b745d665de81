//! The random-walk Laplacian `Δf(x) = f(x) - Σ_y m(x,y)/m(x) f(y)` and its
//! first positive eigenvalue μ₁.
//!
//! Δ is similar to the symmetric matrix `I - D^{-1/2} M D^{-1/2}`, which is
//! what gets diagonalised here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::WeightedGraph;

/// Eigenvalues at or below this are treated as the kernel.
pub const ZERO_TOLERANCE: f64 = 1e-9;

/// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
pub const JACOBI_THRESHOLD: f64 = 1e-12;

pub const DEFAULT_DENSE_CAP: usize = 4096;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("dense eigensolver limited to {cap} vertices, graph has {n}")]
    SizeCapExceeded { n: usize, cap: usize },
    #[error("no eigenvalue above the zero tolerance")]
    DegenerateSpectrum,
    #[error("Jacobi iteration did not converge in {0} sweeps")]
    NoConvergence(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub mu1: f64,
}

pub fn laplacian_spectrum(graph: &WeightedGraph) -> Result<Spectrum, SpectralError> {
    laplacian_spectrum_capped(graph, DEFAULT_DENSE_CAP)
}

pub fn laplacian_spectrum_capped(graph: &WeightedGraph, cap: usize) -> Result<Spectrum, SpectralError> {
    let n = graph.vertex_count();
    if n > cap {
        return Err(SpectralError::SizeCapExceeded { n, cap });
    }
    let mut a = normalized_laplacian(graph);
    let eigenvalues = jacobi_eigenvalues(&mut a, n, None)?;
    let mu1 = first_positive(&eigenvalues)?;
    Ok(Spectrum { eigenvalues, mu1 })
}

pub fn mu1(graph: &WeightedGraph) -> Result<f64, SpectralError> {
    laplacian_spectrum(graph).map(|s| s.mu1)
}

fn first_positive(sorted: &[f64]) -> Result<f64, SpectralError> {
    sorted
        .iter()
        .copied()
        .find(|&x| x > ZERO_TOLERANCE)
        .ok_or(SpectralError::DegenerateSpectrum)
}

/// Row-major `I - D^{-1/2} M D^{-1/2}`.
fn normalized_laplacian(graph: &WeightedGraph) -> Vec<f64> {
    let n = graph.vertex_count();
    let vw = graph.vertex_weights_as::<f64>();
    let ew = graph.edge_weights_as::<f64>();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = 1.0;
    }
    for (e, w) in graph.edges().iter().zip(ew) {
        let v = -w / (vw[e.u] * vw[e.v]).sqrt();
        a[e.u * n + e.v] = v;
        a[e.v * n + e.u] = v;
    }
    a
}

/// Cyclic Jacobi on a symmetric row-major matrix. Returns ascending
/// eigenvalues; when `vectors` is given it receives the matching
/// eigenvectors as columns.
fn jacobi_eigenvalues(
    a: &mut [f64],
    n: usize,
    mut vectors: Option<&mut Vec<f64>>,
) -> Result<Vec<f64>, SpectralError> {
    if let Some(v) = vectors.as_deref_mut() {
        v.clear();
        v.resize(n * n, 0.0);
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
    }

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| 2.0 * a[p * n + q] * a[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off < JACOBI_THRESHOLD {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                if let Some(v) = vectors.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    if !converged {
        return Err(SpectralError::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    if let Some(v) = vectors {
        let old = v.clone();
        for (new_col, &old_col) in order.iter().enumerate() {
            for k in 0..n {
                v[k * n + new_col] = old[k * n + old_col];
            }
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_complete, gen_cycle, gen_hamming, gen_path, gen_tree_ball};
    use crate::number::Value;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn two_state_chain() {
        let s = laplacian_spectrum(&gen_complete(2).unwrap()).unwrap();
        assert!((s.eigenvalues[0]).abs() < 1e-12);
        assert!((s.eigenvalues[1] - 2.0).abs() < 1e-12);
        assert!((s.mu1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hamming_mu1() {
        for n in 1..=6 {
            let m = mu1(&gen_hamming(n).unwrap()).unwrap();
            assert!((m - 2.0 / n as f64).abs() < 1e-9, "n={n}: {m}");
        }
    }

    #[test]
    fn path_mu1() {
        for n in 2..=50 {
            let m = mu1(&gen_path(n).unwrap()).unwrap();
            let expected = 1.0 - (PI / n as f64).cos();
            assert!((m - expected).abs() < 1e-9, "n={n}: {m} vs {expected}");
        }
    }

    #[test]
    fn cycle_star_and_tree_paths() {
        assert!((mu1(&gen_cycle(4).unwrap()).unwrap() - 1.0).abs() < 1e-9);
        assert!((mu1(&gen_tree_ball(3, 1).unwrap()).unwrap() - 1.0).abs() < 1e-9);
        for r in 1..=6 {
            let m = mu1(&gen_tree_ball(2, r).unwrap()).unwrap();
            let expected = 1.0 - (PI / (2 * r) as f64).cos();
            assert!((m - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn star_matches_characteristic_polynomial() {
        // Normalized Laplacian of K_{1,3}: eigenvalues 0, 1, 1, 2.
        let s = laplacian_spectrum(&gen_tree_ball(3, 1).unwrap()).unwrap();
        for (got, want) in s.eigenvalues.iter().zip([0.0, 1.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn spectrum_invariants() {
        let graphs = [
            gen_hamming(4).unwrap(),
            gen_tree_ball(3, 3).unwrap(),
            gen_cycle(9).unwrap(),
            crate::generators::gen_random_regular(20, 3, 5).unwrap(),
        ];
        for g in &graphs {
            let s = laplacian_spectrum(g).unwrap();
            let n = g.vertex_count() as f64;
            assert!(s.eigenvalues[0].abs() < ZERO_TOLERANCE);
            assert!(s.eigenvalues[1] > ZERO_TOLERANCE);
            assert!(*s.eigenvalues.last().unwrap() <= 2.0 + ZERO_TOLERANCE);
            let trace: f64 = s.eigenvalues.iter().sum();
            assert!((trace - n).abs() < n * 1e-9);

            let scaled = g.scaled(&Value::from(7));
            assert!((mu1(&scaled).unwrap() - s.mu1).abs() < 1e-9);
        }
    }

    #[test]
    fn size_cap() {
        let g = gen_path(10).unwrap();
        assert_eq!(
            laplacian_spectrum_capped(&g, 5).unwrap_err(),
            SpectralError::SizeCapExceeded { n: 11, cap: 5 }
        );
    }

    /// Σ m(x,y)(fx-fy)² / ((1/m∅) Σ m(x)m(y)(fx-fy)²), ordered pairs.
    fn rayleigh(g: &WeightedGraph, f: &[f64]) -> f64 {
        let vw = g.vertex_weights_as::<f64>();
        let ew = g.edge_weights_as::<f64>();
        let total = g.total_weight_as::<f64>();
        let num: f64 = g
            .edges()
            .iter()
            .zip(&ew)
            .map(|(e, w)| 2.0 * w * (f[e.u] - f[e.v]).powi(2))
            .sum();
        let mut den = 0.0;
        for x in 0..f.len() {
            for y in 0..f.len() {
                den += vw[x] * vw[y] * (f[x] - f[y]).powi(2);
            }
        }
        num / (den / total)
    }

    #[test]
    fn rayleigh_quotient_oracle() {
        let mut weighted_edges = vec![];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 1..7usize {
            weighted_edges.push((i - 1, i, Value::from(rng.gen_range(1..5i64))));
        }
        weighted_edges.push((0, 4, Value::from(3)));
        weighted_edges.push((2, 6, Value::from(2)));
        let graphs = [
            gen_hamming(3).unwrap(),
            gen_tree_ball(3, 2).unwrap(),
            gen_path(5).unwrap(),
            gen_cycle(6).unwrap(),
            WeightedGraph::new(7, weighted_edges).unwrap(),
        ];
        for g in &graphs {
            let n = g.vertex_count();
            let mut a = normalized_laplacian(g);
            let mut vecs = Vec::new();
            let vals = jacobi_eigenvalues(&mut a, n, Some(&mut vecs)).unwrap();
            let idx = vals.iter().position(|&x| x > ZERO_TOLERANCE).unwrap();
            let vw = g.vertex_weights_as::<f64>();
            // Δ eigenvector = D^{-1/2} · symmetric eigenvector
            let f: Vec<f64> = (0..n).map(|x| vecs[x * n + idx] / vw[x].sqrt()).collect();
            let at_eigenvector = rayleigh(g, &f);
            assert!((at_eigenvector - vals[idx]).abs() < 1e-6);

            let mut best = at_eigenvector;
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            for _ in 0..10_000 {
                let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let q = rayleigh(g, &f);
                assert!(q >= vals[idx] - 1e-6, "random vector beat μ₁: {q} < {}", vals[idx]);
                best = best.min(q);
            }
            assert!((best - vals[idx]).abs() < 1e-6);
        }
    }
}
