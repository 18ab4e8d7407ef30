//! Weighted undirected multigraph, Laplacian views, walk-weight arithmetic,
//! the double cover, and Schur-complement graph elimination.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Dense square matrix used by the oracle paths.
pub type DenseMatrix = nalgebra::DMatrix<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, w: f64) -> Self {
        Edge { u, v, w }
    }

    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

/// Weighted undirected multigraph with positive finite edge weights.
///
/// Parallel edges are kept as-is; matrix views aggregate them. Self-loops are
/// representable (walk graphs have them) but contribute nothing to the
/// Laplacian.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: OnceLock<Adjacency>,
}

/// Aggregated adjacency with per-vertex neighbor prefix sums, built once on
/// demand and reused by the walk sampler.
#[derive(Debug, Clone)]
pub struct Adjacency {
    /// Per vertex: (neighbor, aggregated weight), sorted by neighbor id.
    pub neighbors: Vec<Vec<(usize, f64)>>,
    /// Per vertex: running prefix sums of the neighbor weights.
    pub prefix: Vec<Vec<f64>>,
    /// Weighted degrees (row sums of the aggregated adjacency matrix).
    pub degree: Vec<f64>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) out of range for n = {}",
                    e.u, e.v, n
                )));
            }
            if !(e.w > 0.0 && e.w.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has non-positive or non-finite weight {}",
                    e.u, e.v, e.w
                )));
            }
        }
        Ok(Graph {
            n,
            edges,
            adj: OnceLock::new(),
        })
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: OnceLock::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacency(&self) -> &Adjacency {
        self.adj.get_or_init(|| {
            let mut agg: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); self.n];
            for e in &self.edges {
                *agg[e.u].entry(e.v).or_insert(0.0) += e.w;
                if e.u != e.v {
                    *agg[e.v].entry(e.u).or_insert(0.0) += e.w;
                }
            }
            let neighbors: Vec<Vec<(usize, f64)>> = agg
                .into_iter()
                .map(|m| m.into_iter().collect())
                .collect();
            let prefix: Vec<Vec<f64>> = neighbors
                .iter()
                .map(|ns| {
                    let mut acc = 0.0;
                    ns.iter()
                        .map(|&(_, w)| {
                            acc += w;
                            acc
                        })
                        .collect()
                })
                .collect();
            let degree: Vec<f64> = prefix
                .iter()
                .map(|p| p.last().copied().unwrap_or(0.0))
                .collect();
            Adjacency {
                neighbors,
                prefix,
                degree,
            }
        })
    }

    /// Aggregated weight between `u` and `v` (0 if not adjacent).
    pub fn weight_between(&self, u: usize, v: usize) -> f64 {
        let ns = &self.adjacency().neighbors[u];
        match ns.binary_search_by(|&(x, _)| x.cmp(&v)) {
            Ok(i) => ns[i].1,
            Err(_) => 0.0,
        }
    }

    /// Weighted degree d_u (self-loops counted once).
    pub fn degree(&self, u: usize) -> f64 {
        self.adjacency().degree[u]
    }

    pub fn adjacency_matrix(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.u, e.v)] += e.w;
            if e.u != e.v {
                a[(e.v, e.u)] += e.w;
            }
        }
        a
    }

    /// L = D - A. Self-loops cancel and contribute nothing.
    pub fn laplacian(&self) -> DenseMatrix {
        let mut l = DenseMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            if e.u == e.v {
                continue;
            }
            l[(e.u, e.u)] += e.w;
            l[(e.v, e.v)] += e.w;
            l[(e.u, e.v)] -= e.w;
            l[(e.v, e.u)] -= e.w;
        }
        l
    }

    /// Weight of the walk u_0..u_k per the product formula: edge weights over
    /// interior degrees. Parallel edges use the aggregated weight.
    pub fn walk_weight(&self, walk: &[usize]) -> Result<f64> {
        if walk.len() < 2 {
            return Err(Error::InvalidArgument(
                "walk must have length at least 1".into(),
            ));
        }
        let mut num = 1.0;
        for i in 1..walk.len() {
            let w = self.weight_between(walk[i - 1], walk[i]);
            if w <= 0.0 {
                return Err(Error::NotAnEdge(walk[i - 1], walk[i]));
            }
            num *= w;
        }
        let mut den = 1.0;
        for &u in &walk[1..walk.len() - 1] {
            den *= self.degree(u);
        }
        Ok(num / den)
    }

    /// Dense construction of the k-step walk graph G^k, self-loops included.
    /// Oracle use only: the output has Theta(n^2) edges in general.
    pub fn walk_graph_dense(&self, k: usize) -> Result<Graph> {
        if k < 1 {
            return Err(Error::InvalidArgument("walk length k must be >= 1".into()));
        }
        let a = self.adjacency_matrix();
        let dinv: Vec<f64> = (0..self.n)
            .map(|u| {
                let d = self.degree(u);
                if d > 0.0 {
                    1.0 / d
                } else {
                    0.0
                }
            })
            .collect();
        // M_j = A (D^-1 A)^(j-1), built left to right.
        let mut m = a.clone();
        for _ in 1..k {
            let mut dm = m;
            for i in 0..self.n {
                for j in 0..self.n {
                    dm[(i, j)] *= dinv[i];
                }
            }
            m = &a * dm;
        }
        let mut edges = Vec::new();
        for u in 0..self.n {
            for v in u..self.n {
                let w = m[(u, v)];
                if w > 0.0 {
                    edges.push(Edge::new(u, v, w));
                }
            }
        }
        Graph::new(self.n, edges)
    }

    /// Double cover G x P2: bipartite lift on 2n vertices, vertex x maps to
    /// x (side A) and x + n (side B); each edge uv becomes u^A v^B and u^B v^A.
    pub fn double_cover(&self) -> Graph {
        let n = self.n;
        let mut edges = Vec::with_capacity(2 * self.edges.len());
        for e in &self.edges {
            edges.push(Edge::new(e.u, e.v + n, e.w));
            edges.push(Edge::new(e.v, e.u + n, e.w));
        }
        Graph {
            n: 2 * n,
            edges,
            adj: OnceLock::new(),
        }
    }

    /// Eliminates the vertices of `f` one by one via the pairwise rule
    /// w_uv1 * w_uv2 / d_u. The output keeps the original vertex ids; the
    /// eliminated vertices end up isolated. Its Laplacian restricted to the
    /// remaining vertices equals the algebraic Schur complement Sc(L_G, F).
    pub fn schur_complement_graph(&self, f: &[usize]) -> Result<Graph> {
        let mut in_f = vec![false; self.n];
        for &u in f {
            if u >= self.n {
                return Err(Error::InvalidArgument(format!(
                    "eliminated vertex {} out of range",
                    u
                )));
            }
            if in_f[u] {
                return Err(Error::InvalidArgument(format!(
                    "vertex {} listed twice in elimination set",
                    u
                )));
            }
            in_f[u] = true;
        }
        // Aggregated non-loop neighbor maps; self-loops tracked separately
        // (they carry no Laplacian content and never enter elimination degrees).
        let mut nbr: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); self.n];
        let mut loops = vec![0.0; self.n];
        for e in &self.edges {
            if e.u == e.v {
                loops[e.u] += e.w;
            } else {
                *nbr[e.u].entry(e.v).or_insert(0.0) += e.w;
                *nbr[e.v].entry(e.u).or_insert(0.0) += e.w;
            }
        }
        for &u in f {
            let incident: Vec<(usize, f64)> = nbr[u].iter().map(|(&v, &w)| (v, w)).collect();
            let d: f64 = incident.iter().map(|&(_, w)| w).sum();
            if d <= 0.0 {
                return Err(Error::IsolatedElimination(u));
            }
            for (i, &(v1, w1)) in incident.iter().enumerate() {
                loops[v1] += w1 * w1 / d;
                for &(v2, w2) in &incident[i + 1..] {
                    let w = w1 * w2 / d;
                    *nbr[v1].entry(v2).or_insert(0.0) += w;
                    *nbr[v2].entry(v1).or_insert(0.0) += w;
                }
            }
            for &(v, _) in &incident {
                nbr[v].remove(&u);
            }
            nbr[u].clear();
            loops[u] = 0.0;
        }
        let mut edges = Vec::new();
        for u in 0..self.n {
            if loops[u] > 0.0 {
                edges.push(Edge::new(u, u, loops[u]));
            }
            for (&v, &w) in &nbr[u] {
                if v > u {
                    edges.push(Edge::new(u, v, w));
                }
            }
        }
        Graph::new(self.n, edges)
    }

    /// Connected-component label per vertex (labels are the smallest vertex id
    /// in each component).
    pub fn components(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut label = vec![usize::MAX; self.n];
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = s;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &(v, _) in &adj.neighbors[u] {
                    if label[v] == usize::MAX {
                        label[v] = s;
                        stack.push(v);
                    }
                }
            }
        }
        label
    }

    pub fn num_components(&self) -> usize {
        let label = self.components();
        (0..self.n).filter(|&v| label[v] == v).count()
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.num_components() == 1
    }

    /// Two vertices in different components, if any.
    pub fn disconnected_pair(&self) -> Option<(usize, usize)> {
        let label = self.components();
        (1..self.n).find(|&v| label[v] != label[0]).map(|v| (0, v))
    }

    /// Sum of all edge weights (self-loops included).
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Same graph with parallel edges merged and edges sorted by (u, v).
    pub fn aggregated(&self) -> Graph {
        let mut agg: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for e in &self.edges {
            let key = (e.u.min(e.v), e.u.max(e.v));
            *agg.entry(key).or_insert(0.0) += e.w;
        }
        let edges = agg
            .into_iter()
            .map(|((u, v), w)| Edge::new(u, v, w))
            .collect();
        Graph {
            n: self.n,
            edges,
            adj: OnceLock::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn path3() -> Graph {
        Graph::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)]).unwrap()
    }

    fn k3() -> Graph {
        Graph::new(
            3,
            vec![
                Edge::new(0, 1, 1.0),
                Edge::new(1, 2, 1.0),
                Edge::new(0, 2, 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn laplacian_single_edge() {
        let g = Graph::new(2, vec![Edge::new(0, 1, 1.0)]).unwrap();
        let l = g.laplacian();
        let expect = DenseMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(l, expect);
    }

    #[test]
    fn laplacian_empty_graph() {
        let g = Graph::empty(3);
        assert_eq!(g.laplacian(), DenseMatrix::zeros(3, 3));
    }

    #[test]
    fn laplacian_path_row_sums_zero() {
        let l = path3().laplacian();
        assert_eq!(l[(0, 0)], 1.0);
        assert_eq!(l[(1, 1)], 2.0);
        assert_eq!(l[(2, 2)], 1.0);
        for i in 0..3 {
            let s: f64 = (0..3).map(|j| l[(i, j)]).sum();
            assert!(s.abs() < 1e-12);
        }
    }

    #[test]
    fn self_loop_cancels_in_laplacian() {
        let g = Graph::new(2, vec![Edge::new(0, 1, 1.0), Edge::new(0, 0, 5.0)]).unwrap();
        assert_eq!(g.laplacian()[(0, 0)], 1.0);
        assert_eq!(g.degree(0), 6.0);
    }

    #[test]
    fn walk_weight_path() {
        let g = path3();
        assert_eq!(g.walk_weight(&[0, 1, 2]).unwrap(), 0.5);
        assert_eq!(g.walk_weight(&[0, 1]).unwrap(), 1.0);
        assert_eq!(g.walk_weight(&[1, 0, 1]).unwrap(), 1.0);
        assert!(matches!(
            g.walk_weight(&[0, 2]),
            Err(Error::NotAnEdge(0, 2))
        ));
    }

    #[test]
    fn walk_graph_path_squared() {
        let g2 = path3().walk_graph_dense(2).unwrap();
        assert_eq!(g2.weight_between(0, 2), 0.5);
        assert_eq!(g2.weight_between(0, 0), 0.5);
        assert_eq!(g2.weight_between(2, 2), 0.5);
        assert_eq!(g2.weight_between(1, 1), 2.0);
        assert_eq!(g2.weight_between(0, 1), 0.0);
    }

    #[test]
    fn walk_graph_k1_is_identity_map() {
        let g = k3();
        let g1 = g.walk_graph_dense(1).unwrap();
        assert_eq!(g1.laplacian(), g.laplacian());
        assert!(g.walk_graph_dense(0).is_err());
    }

    #[test]
    fn double_cover_single_edge() {
        let g = Graph::new(2, vec![Edge::new(0, 1, 1.0)]).unwrap();
        let dc = g.double_cover();
        assert_eq!(dc.n(), 4);
        assert_eq!(dc.m(), 2);
        assert_eq!(dc.weight_between(0, 3), 1.0);
        assert_eq!(dc.weight_between(1, 2), 1.0);
    }

    #[test]
    fn double_cover_of_path_disconnects() {
        // P3 is bipartite, so its double cover is two disjoint paths.
        let dc = path3().double_cover();
        assert_eq!(dc.num_components(), 2);
        assert_eq!(dc.m(), 4);
    }

    #[test]
    fn double_cover_of_triangle_is_hexagon() {
        let dc = k3().double_cover();
        assert_eq!(dc.n(), 6);
        assert_eq!(dc.m(), 6);
        assert!(dc.is_connected());
        for v in 0..6 {
            assert_eq!(dc.degree(v), 2.0);
        }
    }

    #[test]
    fn schur_path_middle_vertex() {
        let sc = path3().schur_complement_graph(&[1]).unwrap();
        assert_eq!(sc.weight_between(0, 2), 0.5);
        assert_eq!(sc.weight_between(0, 0), 0.5);
        assert_eq!(sc.weight_between(2, 2), 0.5);
        assert_eq!(sc.degree(1), 0.0);
    }

    #[test]
    fn schur_empty_set_is_identity() {
        let g = k3();
        let sc = g.schur_complement_graph(&[]).unwrap();
        assert_eq!(sc.laplacian(), g.laplacian());
    }

    #[test]
    fn schur_isolated_vertex_rejected() {
        let g = Graph::new(3, vec![Edge::new(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            g.schur_complement_graph(&[2]),
            Err(Error::IsolatedElimination(2))
        ));
    }

    #[test]
    fn double_cover_schur_gives_walk_square() {
        // Eliminating the B side of G x P2 yields G^2 on the A side.
        let g = k3();
        let dc = g.double_cover();
        let f: Vec<usize> = (3..6).collect();
        let sc = dc.schur_complement_graph(&f).unwrap();
        let g2 = g.walk_graph_dense(2).unwrap();
        for u in 0..3 {
            for v in u..3 {
                assert!((sc.weight_between(u, v) - g2.weight_between(u, v)).abs() < 1e-12);
            }
        }
    }
}
