//! Deterministic graph generators for the CLI and tests.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::rng::{substream, Stream};

pub fn path(n: usize, w: f64) -> Graph {
    let edges = (1..n).map(|v| Edge::new(v - 1, v, w)).collect();
    Graph::new(n, edges).expect("valid path")
}

pub fn cycle(n: usize, w: f64) -> Graph {
    let mut edges: Vec<Edge> = (1..n).map(|v| Edge::new(v - 1, v, w)).collect();
    if n > 2 {
        edges.push(Edge::new(n - 1, 0, w));
    }
    Graph::new(n, edges).expect("valid cycle")
}

/// Star with hub 0.
pub fn star(n: usize, w: f64) -> Graph {
    let edges = (1..n).map(|v| Edge::new(0, v, w)).collect();
    Graph::new(n, edges).expect("valid star")
}

pub fn complete(n: usize, w: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push(Edge::new(u, v, w));
        }
    }
    Graph::new(n, edges).expect("valid complete graph")
}

/// rows x cols grid, vertex (r, c) = r * cols + c.
pub fn grid(rows: usize, cols: usize, w: f64) -> Graph {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push(Edge::new(v, v + 1, w));
            }
            if r + 1 < rows {
                edges.push(Edge::new(v, v + cols, w));
            }
        }
    }
    Graph::new(rows * cols, edges).expect("valid grid")
}

/// Two k-cliques joined by a single bridge edge.
pub fn barbell(k: usize, w: f64) -> Result<Graph> {
    if k < 2 {
        return Err(Error::InvalidArgument(
            "barbell clique size must be >= 2".into(),
        ));
    }
    let mut edges = Vec::new();
    for side in 0..2 {
        let off = side * k;
        for u in 0..k {
            for v in (u + 1)..k {
                edges.push(Edge::new(off + u, off + v, w));
            }
        }
    }
    edges.push(Edge::new(k - 1, k, w));
    Graph::new(2 * k, edges)
}

/// Erdos-Renyi G(n, p) with unit weights, deterministic in the seed.
pub fn gnp(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument("gnp probability not in [0, 1]".into()));
    }
    let mut rng = substream(seed, Stream::Generate, 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                edges.push(Edge::new(u, v, 1.0));
            }
        }
    }
    Graph::new(n, edges)
}

/// G(n, p) forced connected by overlaying a random Hamiltonian path
/// (duplicate pairs dropped). Test helper for "random connected graph".
pub fn gnp_connected(n: usize, p: f64, seed: u64) -> Graph {
    let g = gnp(n, p, seed).expect("valid p");
    let mut rng = substream(seed, Stream::Generate, 1);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let mut present: std::collections::HashSet<(usize, usize)> = g
        .edges()
        .iter()
        .map(|e| (e.u.min(e.v), e.u.max(e.v)))
        .collect();
    let mut edges = g.edges().to_vec();
    for i in 1..n {
        let (a, b) = (perm[i - 1].min(perm[i]), perm[i - 1].max(perm[i]));
        if present.insert((a, b)) {
            edges.push(Edge::new(a, b, 1.0));
        }
    }
    Graph::new(n, edges).expect("valid graph")
}

/// Random connected graph with weights log-uniform in [0.1, 10].
pub fn random_weighted_connected(n: usize, p: f64, seed: u64) -> Graph {
    let g = gnp_connected(n, p, seed);
    let mut rng = substream(seed, Stream::Generate, 2);
    let edges = g
        .edges()
        .iter()
        .map(|e| {
            let t: f64 = rng.random();
            Edge::new(e.u, e.v, 10f64.powf(2.0 * t - 1.0))
        })
        .collect();
    Graph::new(n, edges).expect("valid graph")
}

/// Connected graph with roughly `m_target` edges on n vertices: a random
/// spanning path plus uniformly sampled extra pairs. Used by the density
/// scaling report.
pub fn fixed_density(n: usize, m_target: usize, seed: u64) -> Graph {
    let mut rng = substream(seed, Stream::Generate, 3);
    let mut present = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for v in 1..n {
        present.insert((v - 1, v));
        edges.push(Edge::new(v - 1, v, 1.0));
    }
    while edges.len() < m_target {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if present.insert(key) {
            edges.push(Edge::new(key.0, key.1, 1.0));
        }
    }
    Graph::new(n, edges).expect("valid graph")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_has_hub_edges() {
        let g = star(5, 1.0);
        assert_eq!(g.m(), 4);
        assert_eq!(g.degree(0), 4.0);
    }

    #[test]
    fn grid_4x4_has_24_edges() {
        assert_eq!(grid(4, 4, 1.0).m(), 24);
    }

    #[test]
    fn gnp_is_deterministic() {
        let a = gnp(100, 0.1, 7).unwrap();
        let b = gnp(100, 0.1, 7).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert_ne!(a.edges(), gnp(100, 0.1, 8).unwrap().edges());
    }

    #[test]
    fn gnp_connected_is_connected() {
        for seed in 0..5 {
            assert!(gnp_connected(30, 0.05, seed).is_connected());
        }
    }

    #[test]
    fn barbell_structure() {
        let g = barbell(4, 1.0).unwrap();
        assert_eq!(g.n(), 8);
        assert_eq!(g.m(), 13);
        assert!(g.is_connected());
    }
}
