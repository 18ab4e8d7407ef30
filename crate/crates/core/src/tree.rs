//! Spanning trees and forests with LCA-based stretch queries.
//!
//! Tree construction is a portfolio heuristic: the maximum-weight spanning
//! forest plus shortest-path trees (edge length 1/w) from randomly seeded
//! roots, keeping whichever has the smallest exactly measured total stretch.
//! Downstream sample counts only ever consume the measured stretch, so nothing
//! depends on an asymptotic stretch guarantee.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::IndexedRandom;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::rng::{substream, Stream};

pub const NO_PARENT: usize = usize::MAX;

/// Rooted spanning forest with an ancestor-doubling LCA index and
/// root-to-vertex resistance prefix sums.
#[derive(Debug, Clone)]
pub struct RootedTree {
    parent: Vec<usize>,
    parent_w: Vec<f64>,
    depth: Vec<usize>,
    /// Component label: the root of each vertex's tree.
    comp: Vec<usize>,
    /// up[j][v] = 2^j-th ancestor of v (roots point to themselves).
    up: Vec<Vec<usize>>,
    /// Sum of 1/w along the path from the root down to v.
    rootsum: Vec<f64>,
    /// Vertices in parents-before-children order.
    order: Vec<usize>,
    /// Total stretch over the graph the forest was built for, when recorded.
    recorded_stretch: Option<f64>,
}

impl RootedTree {
    /// Builds the index structures from a parent array. Roots carry
    /// `NO_PARENT`. Fails on cycles or out-of-range parents.
    pub fn from_parents(parent: Vec<usize>, parent_w: Vec<f64>) -> Result<Self> {
        let n = parent.len();
        if parent_w.len() != n {
            return Err(Error::InvalidArgument(
                "parent and weight arrays differ in length".into(),
            ));
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for v in 0..n {
            if parent[v] == NO_PARENT {
                roots.push(v);
            } else if parent[v] >= n {
                return Err(Error::InvalidArgument(format!(
                    "parent of {} out of range",
                    v
                )));
            } else {
                if !(parent_w[v] > 0.0 && parent_w[v].is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "tree edge ({}, {}) has invalid weight",
                        v, parent[v]
                    )));
                }
                children[parent[v]].push(v);
            }
        }
        let mut depth = vec![0usize; n];
        let mut comp = vec![NO_PARENT; n];
        let mut rootsum = vec![0.0; n];
        let mut order = Vec::with_capacity(n);
        for &r in &roots {
            comp[r] = r;
            order.push(r);
        }
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &c in &children[u] {
                depth[c] = depth[u] + 1;
                comp[c] = comp[u];
                rootsum[c] = rootsum[u] + 1.0 / parent_w[c];
                order.push(c);
            }
        }
        if order.len() != n {
            return Err(Error::InvalidArgument(
                "parent array contains a cycle".into(),
            ));
        }
        let levels = usize::BITS as usize - (n.max(2) - 1).leading_zeros() as usize;
        let mut up = Vec::with_capacity(levels.max(1));
        let base: Vec<usize> = (0..n)
            .map(|v| if parent[v] == NO_PARENT { v } else { parent[v] })
            .collect();
        up.push(base);
        for j in 1..levels.max(1) {
            let prev = &up[j - 1];
            let next: Vec<usize> = (0..n).map(|v| prev[prev[v]]).collect();
            up.push(next);
        }
        Ok(RootedTree {
            parent,
            parent_w,
            depth,
            comp,
            up,
            rootsum,
            order,
            recorded_stretch: None,
        })
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: usize) -> usize {
        self.parent[v]
    }

    pub fn parent_weight(&self, v: usize) -> f64 {
        self.parent_w[v]
    }

    pub fn is_root(&self, v: usize) -> bool {
        self.parent[v] == NO_PARENT
    }

    /// Vertices in parents-before-children order; used by the tree solver.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn component(&self, v: usize) -> usize {
        self.comp[v]
    }

    pub fn num_trees(&self) -> usize {
        self.parent.iter().filter(|&&p| p == NO_PARENT).count()
    }

    pub fn recorded_stretch(&self) -> Option<f64> {
        self.recorded_stretch
    }

    /// Tree edges as a graph on the same vertex set, optionally scaled.
    pub fn as_graph(&self, scale: f64) -> Graph {
        let edges: Vec<Edge> = (0..self.n())
            .filter(|&v| !self.is_root(v))
            .map(|v| Edge::new(v, self.parent[v], self.parent_w[v] * scale))
            .collect();
        Graph::new(self.n(), edges).expect("tree edges are valid")
    }

    /// Deepest common ancestor, or None when u and v are in different trees.
    pub fn lca(&self, u: usize, v: usize) -> Option<usize> {
        if self.comp[u] != self.comp[v] {
            return None;
        }
        let (mut u, mut v) = (u, v);
        if self.depth[u] < self.depth[v] {
            std::mem::swap(&mut u, &mut v);
        }
        let mut diff = self.depth[u] - self.depth[v];
        let mut j = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                u = self.up[j][u];
            }
            diff >>= 1;
            j += 1;
        }
        if u == v {
            return Some(u);
        }
        for j in (0..self.up.len()).rev() {
            if self.up[j][u] != self.up[j][v] {
                u = self.up[j][u];
                v = self.up[j][v];
            }
        }
        Some(self.up[0][u])
    }

    /// Sum of 1/w along the tree path between u and v; +inf across trees.
    pub fn path_resistance(&self, u: usize, v: usize) -> f64 {
        match self.lca(u, v) {
            Some(a) => self.rootsum[u] + self.rootsum[v] - 2.0 * self.rootsum[a],
            None => f64::INFINITY,
        }
    }

    /// str_T(e) = w_e * (resistance of the tree path between e's endpoints).
    pub fn edge_stretch(&self, e: &Edge) -> f64 {
        if e.u == e.v {
            return 0.0;
        }
        e.w * self.path_resistance(e.u, e.v)
    }

    pub fn total_stretch(&self, g: &Graph) -> f64 {
        g.edges().iter().map(|e| self.edge_stretch(e)).sum()
    }
}

fn max_weight_spanning_forest(g: &Graph) -> RootedTree {
    let n = g.n();
    let mut idx: Vec<usize> = (0..g.m()).collect();
    idx.sort_by(|&a, &b| {
        g.edges()[b]
            .w
            .partial_cmp(&g.edges()[a].w)
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut dsu: Vec<usize> = (0..n).collect();
    fn find(dsu: &mut [usize], mut x: usize) -> usize {
        while dsu[x] != x {
            dsu[x] = dsu[dsu[x]];
            x = dsu[x];
        }
        x
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in idx {
        let e = g.edges()[i];
        if e.u == e.v {
            continue;
        }
        let (ru, rv) = (find(&mut dsu, e.u), find(&mut dsu, e.v));
        if ru != rv {
            dsu[ru] = rv;
            adj[e.u].push((e.v, e.w));
            adj[e.v].push((e.u, e.w));
        }
    }
    root_forest_bfs(n, &adj)
}

fn root_forest_bfs(n: usize, adj: &[Vec<(usize, f64)>]) -> RootedTree {
    let mut parent = vec![NO_PARENT; n];
    let mut parent_w = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &(v, w) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = u;
                    parent_w[v] = w;
                    queue.push_back(v);
                }
            }
        }
    }
    RootedTree::from_parents(parent, parent_w).expect("forest construction is acyclic")
}

/// Shortest-path forest with edge length 1/w, one given root per component.
fn shortest_path_forest(g: &Graph, roots: &[usize]) -> RootedTree {
    let n = g.n();
    let adj = g.adjacency();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![NO_PARENT; n];
    let mut parent_w = vec![0.0; n];
    let mut done = vec![false; n];
    let mut heap: BinaryHeap<(Reverse<u64>, usize)> = BinaryHeap::new();
    for &r in roots {
        dist[r] = 0.0;
        heap.push((Reverse(0), r));
    }
    while let Some((Reverse(dbits), u)) = heap.pop() {
        if done[u] || f64::from_bits(dbits) > dist[u] {
            continue;
        }
        done[u] = true;
        for &(v, w) in &adj.neighbors[u] {
            if v == u {
                continue;
            }
            let nd = dist[u] + 1.0 / w;
            if nd < dist[v] {
                dist[v] = nd;
                parent[v] = u;
                parent_w[v] = w;
                heap.push((Reverse(nd.to_bits()), v));
            }
        }
    }
    RootedTree::from_parents(parent, parent_w).expect("shortest path forest is acyclic")
}

/// Builds `candidates` spanning forests (max-weight forest plus random-root
/// shortest-path forests), measures each one's total stretch over `g` exactly,
/// and returns the minimizer with the measured stretch recorded.
pub fn build_forest(g: &Graph, seed: u64, candidates: usize) -> RootedTree {
    let comp = g.components();
    let comp_reps: Vec<usize> = (0..g.n()).filter(|&v| comp[v] == v).collect();
    let members: Vec<Vec<usize>> = comp_reps
        .iter()
        .map(|&r| (0..g.n()).filter(|&v| comp[v] == r).collect())
        .collect();

    let mut rng = substream(seed, Stream::TreeRoots, 0);
    let mut best: Option<(f64, RootedTree)> = None;
    let mut consider = |mut t: RootedTree, g: &Graph| {
        let s = t.total_stretch(g);
        t.recorded_stretch = Some(s);
        if best.as_ref().map(|(bs, _)| s < *bs).unwrap_or(true) {
            best = Some((s, t));
        }
    };
    consider(max_weight_spanning_forest(g), g);
    for _ in 1..candidates.max(1) {
        let roots: Vec<usize> = members
            .iter()
            .map(|ms| *ms.choose(&mut rng).expect("component is nonempty"))
            .collect();
        consider(shortest_path_forest(g, &roots), g);
    }
    best.expect("at least one candidate").1
}

/// `build_forest` restricted to connected inputs.
pub fn build_tree(g: &Graph, seed: u64, candidates: usize) -> Result<RootedTree> {
    if let Some((u, v)) = g.disconnected_pair() {
        return Err(Error::Disconnected(u, v));
    }
    Ok(build_forest(g, seed, candidates))
}

/// Removes the ceil(fraction * m) edges of largest stretch (ties broken by
/// ascending edge index). Returns (kept, removed); together they reproduce the
/// input edge multiset exactly.
pub fn split_high_stretch(g: &Graph, t: &RootedTree, fraction: f64) -> Result<(Graph, Graph)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(
            "split fraction must be in (0, 1)".into(),
        ));
    }
    let m = g.m();
    let k = ((fraction * m as f64).ceil() as usize).min(m);
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| {
        let sa = t.edge_stretch(&g.edges()[a]);
        let sb = t.edge_stretch(&g.edges()[b]);
        sb.partial_cmp(&sa).unwrap().then(a.cmp(&b))
    });
    let mut removed_mark = vec![false; m];
    for &i in idx.iter().take(k) {
        removed_mark[i] = true;
    }
    let kept: Vec<Edge> = (0..m)
        .filter(|&i| !removed_mark[i])
        .map(|i| g.edges()[i])
        .collect();
    let removed: Vec<Edge> = (0..m)
        .filter(|&i| removed_mark[i])
        .map(|i| g.edges()[i])
        .collect();
    Ok((Graph::new(g.n(), kept)?, Graph::new(g.n(), removed)?))
}
