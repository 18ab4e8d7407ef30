//! Dense ground-truth machinery: pseudoinverses, generalized-eigenvalue
//! similarity certificates, exhaustive walk enumeration, and the analytic
//! walk-sampler distribution. Everything here is allowed to be cubic; it
//! exists so the probabilistic claims elsewhere can be tested exactly.

use std::collections::BTreeMap;

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::graph::{DenseMatrix, Graph};
use crate::resistance::ResistanceBounds;

/// Relative eigenvalue threshold separating the Laplacian null space.
pub const NULL_SPACE_REL_TOL: f64 = 1e-9;

/// Default cap on n^(k+1) for walk enumeration.
pub const DEFAULT_ENUM_CAP: f64 = 1e7;

/// Moore-Penrose pseudoinverse of a symmetric PSD matrix; eigenvalues below
/// `NULL_SPACE_REL_TOL * lambda_max` are treated as zero.
pub fn pseudoinverse(m: &DenseMatrix) -> DenseMatrix {
    let n = m.nrows();
    if n == 0 {
        return m.clone();
    }
    let eig = SymmetricEigen::new(m.clone());
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let tol = NULL_SPACE_REL_TOL * lmax;
    let mut out = DenseMatrix::zeros(n, n);
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > tol {
            let col = eig.eigenvectors.column(i);
            out += col * col.transpose() / lam;
        }
    }
    out
}

/// Extremal generalized eigenvalues of (L_B, L_A) over the shared column
/// space, with kappa = lambda_max / lambda_min.
#[derive(Debug, Clone, Copy)]
pub struct SimilarityCert {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
}

impl SimilarityCert {
    fn infinite() -> Self {
        SimilarityCert {
            lambda_min: 0.0,
            lambda_max: f64::INFINITY,
            kappa: f64::INFINITY,
        }
    }
}

/// Generalized eigenvalue certificate for (L_B, L_A). A connected-component
/// mismatch yields an infinite certificate, not an error; the null space of
/// the component indicators is deflated explicitly.
pub fn spectral_similarity(a: &Graph, b: &Graph) -> Result<SimilarityCert> {
    if a.n() != b.n() {
        return Err(Error::InvalidArgument(format!(
            "vertex count mismatch: {} vs {}",
            a.n(),
            b.n()
        )));
    }
    if a.components() != b.components() {
        return Ok(SimilarityCert::infinite());
    }
    let la = a.laplacian();
    let lb = b.laplacian();
    let eig = SymmetricEigen::new(la);
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |x, &y| x.max(y.abs()));
    let tol = NULL_SPACE_REL_TOL * lmax;
    let cols: Vec<usize> = (0..a.n())
        .filter(|&i| eig.eigenvalues[i] > tol)
        .collect();
    if cols.is_empty() {
        // Both graphs are edgeless on the shared component structure.
        return Ok(SimilarityCert {
            lambda_min: 1.0,
            lambda_max: 1.0,
            kappa: 1.0,
        });
    }
    // W = U_r S^{-1/2}; eigenvalues of W^T L_B W are the generalized
    // eigenvalues of (L_B, L_A) on the complement of the null space.
    let mut w = DenseMatrix::zeros(a.n(), cols.len());
    for (j, &i) in cols.iter().enumerate() {
        let scale = 1.0 / eig.eigenvalues[i].sqrt();
        w.column_mut(j).copy_from(&(eig.eigenvectors.column(i) * scale));
    }
    let mut m = w.transpose() * lb * &w;
    // Symmetrize against roundoff before the eigensolve.
    m = (&m + m.transpose()) * 0.5;
    let inner = SymmetricEigen::new(m);
    let lambda_min = inner.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let lambda_max = inner.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let kappa = if lambda_min > 0.0 {
        lambda_max / lambda_min
    } else {
        f64::INFINITY
    };
    Ok(SimilarityCert {
        lambda_min,
        lambda_max,
        kappa,
    })
}

/// Scale-sensitive sparsifier quality: max(lambda_max, 1 / lambda_min) of
/// the generalized eigenvalues of (L_H, L_G). Unlike `SimilarityCert::kappa`
/// this rejects a uniformly rescaled copy, so a 2x-weighted clone of G is
/// not a 0.2-sparsifier of it.
pub fn sparsifier_kappa(g: &Graph, h: &Graph) -> Result<f64> {
    let cert = spectral_similarity(g, h)?;
    if cert.lambda_min <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(cert.lambda_max.max(1.0 / cert.lambda_min))
}

/// Artifact-wide convention: H is an eps-sparsifier of G iff
/// sparsifier_kappa(G, H) <= (1 + eps) / (1 - eps).
pub fn is_eps_sparsifier(g: &Graph, h: &Graph, eps: f64) -> Result<bool> {
    Ok(sparsifier_kappa(g, h)? <= kappa_target(eps))
}

pub fn kappa_target(eps: f64) -> f64 {
    (1.0 + eps) / (1.0 - eps)
}

/// All ordered length-k walks with their walk weights.
pub fn enumerate_walks(g: &Graph, k: usize, cap: f64) -> Result<Vec<(Vec<usize>, f64)>> {
    if k < 1 {
        return Err(Error::InvalidArgument("walk length k must be >= 1".into()));
    }
    let states = (g.n() as f64).powi(k as i32 + 1);
    if states > cap {
        return Err(Error::OracleCap(format!(
            "walk enumeration needs {:.3e} states, cap is {:.3e}",
            states, cap
        )));
    }
    let adj = g.adjacency();
    let mut out = Vec::new();
    let mut walk = Vec::with_capacity(k + 1);
    fn extend(
        g: &Graph,
        adj: &crate::graph::Adjacency,
        walk: &mut Vec<usize>,
        weight: f64,
        k: usize,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        if walk.len() == k + 1 {
            out.push((walk.clone(), weight));
            return;
        }
        let u = *walk.last().unwrap();
        // Interior vertices divide by their degree.
        let div = if walk.len() >= 2 { g.degree(u) } else { 1.0 };
        for &(v, w) in &adj.neighbors[u] {
            walk.push(v);
            extend(g, adj, walk, weight * w / div, k, out);
            walk.pop();
        }
    }
    for s in 0..g.n() {
        walk.push(s);
        extend(g, adj, &mut walk, 1.0, k, &mut out);
        walk.pop();
    }
    Ok(out)
}

/// Exact per-walk probabilities of the walk sampler, obtained by folding its
/// decision tree (anchor index x edge x orientation x neighbor steps)
/// analytically. No Monte Carlo anywhere.
pub fn sampler_distribution(
    g: &Graph,
    bounds: &ResistanceBounds,
    k: usize,
    cap: f64,
) -> Result<BTreeMap<Vec<usize>, f64>> {
    if bounds.len() != g.m() {
        return Err(Error::InvalidArgument(
            "bounds are not aligned with the graph's edges".into(),
        ));
    }
    // Anchor mass per unordered vertex pair: sum of w_e * r_e over parallels.
    let mut anchor: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, e) in g.edges().iter().enumerate() {
        let key = (e.u.min(e.v), e.u.max(e.v));
        *anchor.entry(key).or_insert(0.0) += bounds.tau(i);
    }
    let total: f64 = bounds.sum_tau();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument(
            "sampler distribution needs a positive total anchor mass".into(),
        ));
    }
    let walks = enumerate_walks(g, k, cap)?;
    let mut dist = BTreeMap::new();
    for (walk, _) in walks {
        let mut p = 0.0;
        for i in 0..k {
            let (a, b) = (walk[i].min(walk[i + 1]), walk[i].max(walk[i + 1]));
            let mass = match anchor.get(&(a, b)) {
                Some(&m) if m > 0.0 => m,
                _ => continue,
            };
            let orient = if a == b { 1.0 } else { 0.5 };
            let mut q = (1.0 / k as f64) * (mass / total) * orient;
            // Backward extension: steps i -> i-1 -> ... -> 0.
            for j in (1..=i).rev() {
                q *= g.weight_between(walk[j], walk[j - 1]) / g.degree(walk[j]);
            }
            // Forward extension: steps i+1 -> ... -> k.
            for j in (i + 1)..k {
                q *= g.weight_between(walk[j], walk[j + 1]) / g.degree(walk[j]);
            }
            p += q;
        }
        if p > 0.0 {
            dist.insert(walk, p);
        }
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::graph::Edge;

    #[test]
    fn pinv_of_connected_laplacian() {
        let g = gen::path(3, 1.0);
        let l = g.laplacian();
        let p = pseudoinverse(&l);
        // L pinv(L) L = L
        let back = &l * &p * &l;
        assert!((back - &l).norm() < 1e-10);
    }

    #[test]
    fn kappa_of_scaled_copy() {
        let g = gen::gnp_connected(8, 0.4, 1);
        let edges = g
            .edges()
            .iter()
            .map(|e| Edge::new(e.u, e.v, 2.0 * e.w))
            .collect();
        let h = Graph::new(8, edges).unwrap();
        let cert = spectral_similarity(&g, &h).unwrap();
        assert!((cert.lambda_min - 2.0).abs() < 1e-9);
        assert!((cert.lambda_max - 2.0).abs() < 1e-9);
        assert!((cert.kappa - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kappa_is_symmetric_and_reflexive() {
        let a = gen::random_weighted_connected(9, 0.4, 3);
        let b = gen::random_weighted_connected(9, 0.5, 4);
        let ab = spectral_similarity(&a, &b).unwrap();
        let ba = spectral_similarity(&b, &a).unwrap();
        assert!((ab.kappa - ba.kappa).abs() <= 1e-8 * ab.kappa);
        let aa = spectral_similarity(&a, &a).unwrap();
        assert!((aa.kappa - 1.0).abs() < 1e-10);
    }

    #[test]
    fn component_mismatch_is_infinite() {
        let a = gen::path(3, 1.0);
        let b = Graph::new(3, vec![Edge::new(0, 1, 1.0)]).unwrap();
        let cert = spectral_similarity(&a, &b).unwrap();
        assert!(cert.kappa.is_infinite());
    }

    #[test]
    fn triangle_vs_path_kappa_finite() {
        let k3 = gen::complete(3, 1.0);
        let p3 = gen::path(3, 1.0);
        let cert = spectral_similarity(&k3, &p3).unwrap();
        // Generalized eigenvalues of (path, triangle): both graphs connected,
        // golden value from the dense eigensolver: kappa = 3.
        assert!(cert.kappa.is_finite());
        assert!((cert.kappa - 3.0).abs() < 1e-8);
    }

    #[test]
    fn eps_sparsifier_convention() {
        let g = gen::gnp_connected(6, 0.5, 2);
        assert!(is_eps_sparsifier(&g, &g, 0.1).unwrap());
        let doubled = Graph::new(
            6,
            g.edges()
                .iter()
                .map(|e| Edge::new(e.u, e.v, 2.0 * e.w))
                .collect(),
        )
        .unwrap();
        // kappa = 2: inside (1+0.5)/(1-0.5)=3, outside (1.2)/(0.8)=1.5.
        assert!(is_eps_sparsifier(&g, &doubled, 0.5).unwrap());
        assert!(!is_eps_sparsifier(&g, &doubled, 0.2).unwrap());
    }

    #[test]
    fn path3_walk_enumeration() {
        let g = gen::path(3, 1.0);
        let walks = enumerate_walks(&g, 2, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(walks.len(), 6);
        let mut weights: Vec<f64> = walks.iter().map(|(_, w)| *w).collect();
        weights.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(weights, vec![0.5, 0.5, 0.5, 0.5, 1.0, 1.0]);
    }

    #[test]
    fn k1_enumeration_is_directed_edges() {
        let g = gen::gnp_connected(6, 0.4, 5);
        let walks = enumerate_walks(&g, 1, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(walks.len(), 2 * g.aggregated().m());
    }

    #[test]
    fn enumeration_matches_dense_walk_graph() {
        for seed in 0..3u64 {
            let g = gen::gnp_connected(6, 0.5, seed);
            for k in 1..=4 {
                let gk = g.walk_graph_dense(k).unwrap();
                let mut agg: BTreeMap<(usize, usize), f64> = BTreeMap::new();
                for (walk, w) in enumerate_walks(&g, k, DEFAULT_ENUM_CAP).unwrap() {
                    let (a, b) = (walk[0], walk[k]);
                    *agg.entry((a, b)).or_insert(0.0) += w;
                }
                // Ordered-pair convention: entry (u, v) of A(D^-1 A)^(k-1)
                // equals the mass of ordered walks u -> v.
                for u in 0..6 {
                    for v in 0..6 {
                        let got = agg.get(&(u, v)).copied().unwrap_or(0.0);
                        let want = gk.weight_between(u, v);
                        assert!(
                            (got - want).abs() <= 1e-10 * want.max(1.0),
                            "k={} u={} v={} got={} want={}",
                            k,
                            u,
                            v,
                            got,
                            want
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let g = gen::complete(30, 1.0);
        assert!(matches!(
            enumerate_walks(&g, 6, 1e6),
            Err(Error::OracleCap(_))
        ));
    }
}
