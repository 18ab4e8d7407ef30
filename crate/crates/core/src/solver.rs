//! Preconditioned conjugate gradient for Laplacian systems.
//!
//! The preconditioner is a spanning forest of the graph, solved exactly in
//! O(n) per application by leaf elimination; a Jacobi fallback covers the
//! degenerate cases. Right-hand sides are projected onto the range of the
//! Laplacian (mean zero per connected component), which keeps the singular
//! system consistent.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tree::RootedTree;

pub trait Preconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64>;
}

/// Exact solve against the spanning-forest Laplacian.
pub struct ForestPreconditioner<'a> {
    tree: &'a RootedTree,
    comps: Vec<Vec<usize>>,
}

impl<'a> ForestPreconditioner<'a> {
    pub fn new(tree: &'a RootedTree) -> Self {
        let n = tree.n();
        let mut comps: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for v in 0..n {
            comps.entry(tree.component(v)).or_default().push(v);
        }
        ForestPreconditioner {
            tree,
            comps: comps.into_values().collect(),
        }
    }
}

impl Preconditioner for ForestPreconditioner<'_> {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let t = self.tree;
        let mut acc = r.to_vec();
        // Children-first accumulation, then parents-first back substitution.
        for &v in t.order().iter().rev() {
            if !t.is_root(v) {
                acc[t.parent(v)] += acc[v];
            }
        }
        let mut x = vec![0.0; r.len()];
        for &v in t.order() {
            if !t.is_root(v) {
                x[v] = x[t.parent(v)] + acc[v] / t.parent_weight(v);
            }
        }
        for comp in &self.comps {
            let mean: f64 = comp.iter().map(|&v| x[v]).sum::<f64>() / comp.len() as f64;
            for &v in comp {
                x[v] -= mean;
            }
        }
        x
    }
}

/// Jacobi (inverse weighted degree) fallback.
pub struct DiagonalPreconditioner {
    inv_deg: Vec<f64>,
}

impl DiagonalPreconditioner {
    pub fn new(g: &Graph) -> Self {
        let inv_deg = (0..g.n())
            .map(|v| {
                let d = g.degree(v);
                if d > 0.0 {
                    1.0 / d
                } else {
                    0.0
                }
            })
            .collect();
        DiagonalPreconditioner { inv_deg }
    }
}

impl Preconditioner for DiagonalPreconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        r.iter().zip(&self.inv_deg).map(|(&a, &b)| a * b).collect()
    }
}

fn laplacian_matvec(g: &Graph, x: &[f64], out: &mut [f64]) {
    let adj = g.adjacency();
    for v in 0..g.n() {
        let mut acc = 0.0;
        for &(u, w) in &adj.neighbors[v] {
            if u != v {
                acc += w * (x[v] - x[u]);
            }
        }
        out[v] = acc;
    }
}

fn project_component_means(g: &Graph, x: &mut [f64]) {
    let comp = g.components();
    let mut sums: std::collections::BTreeMap<usize, (f64, usize)> = Default::default();
    for v in 0..g.n() {
        let e = sums.entry(comp[v]).or_insert((0.0, 0));
        e.0 += x[v];
        e.1 += 1;
    }
    for v in 0..g.n() {
        let (s, c) = sums[&comp[v]];
        x[v] -= s / c as f64;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves L_G x = b to relative residual `tol`, returning the mean-zero
/// (per component) solution. `row` only labels error reports.
pub fn pcg_solve(
    g: &Graph,
    b: &[f64],
    precond: &dyn Preconditioner,
    tol: f64,
    max_iter: usize,
    row: usize,
) -> Result<Vec<f64>> {
    let n = g.n();
    let mut rhs = b.to_vec();
    project_component_means(g, &mut rhs);
    let b_norm = dot(&rhs, &rhs).sqrt();
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = vec![0.0; n];
    let mut r = rhs;
    let mut z = precond.apply(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        laplacian_matvec(g, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm = dot(&r, &r).sqrt();
        if r_norm <= tol * b_norm {
            project_component_means(g, &mut x);
            return Ok(x);
        }
        z = precond.apply(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverDiverged {
        row,
        iters: max_iter,
        residual: dot(&r, &r).sqrt() / b_norm,
    })
}
