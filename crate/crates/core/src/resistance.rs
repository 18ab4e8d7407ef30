//! Exact and approximate effective resistances and leverage scores.
//!
//! The exact paths go through the dense pseudoinverse and are oracle-only.
//! The scalable estimator is a Johnson-Lindenstrauss sketch of the weighted
//! incidence operator, with each sketch row solved against the Laplacian by
//! spanning-tree-preconditioned conjugate gradient.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::oracle::pseudoinverse;
use crate::rng::{substream, Stream};
use crate::solver::{pcg_solve, DiagonalPreconditioner, ForestPreconditioner};
use crate::tree::build_forest;

/// Default oversampling constant for the JL sketch row count.
pub const C_JL_DEFAULT: f64 = 4.0;

const PCG_TOL: f64 = 1e-8;

/// Per-edge effective-resistance upper bounds r, aligned with the graph's
/// edge order, plus the induced leverage bounds tau_e = w_e * r_e and their
/// cached total.
#[derive(Debug, Clone)]
pub struct ResistanceBounds {
    resistances: Vec<f64>,
    tau: Vec<f64>,
    sum_tau: f64,
}

impl ResistanceBounds {
    pub fn new(g: &Graph, resistances: Vec<f64>) -> Result<Self> {
        if resistances.len() != g.m() {
            return Err(Error::InvalidArgument(format!(
                "expected {} resistance values, got {}",
                g.m(),
                resistances.len()
            )));
        }
        for (i, &r) in resistances.iter().enumerate() {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "resistance bound {} for edge {} is invalid",
                    r, i
                )));
            }
        }
        let tau: Vec<f64> = g
            .edges()
            .iter()
            .zip(&resistances)
            .map(|(e, &r)| if e.is_loop() { 0.0 } else { e.w * r })
            .collect();
        let sum_tau = tau.iter().sum();
        Ok(ResistanceBounds {
            resistances,
            tau,
            sum_tau,
        })
    }

    /// Uniform bounds r_e = c for every non-loop edge.
    pub fn uniform(g: &Graph, c: f64) -> Self {
        let r = g
            .edges()
            .iter()
            .map(|e| if e.is_loop() { 0.0 } else { c })
            .collect();
        Self::new(g, r).expect("uniform bounds are valid")
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn resistance(&self, i: usize) -> f64 {
        self.resistances[i]
    }

    pub fn resistances(&self) -> &[f64] {
        &self.resistances
    }

    pub fn tau(&self, i: usize) -> f64 {
        self.tau[i]
    }

    pub fn taus(&self) -> &[f64] {
        &self.tau
    }

    pub fn sum_tau(&self) -> f64 {
        self.sum_tau
    }

    /// Scales every bound by a constant factor >= 1.
    pub fn scaled(&self, factor: f64) -> Self {
        ResistanceBounds {
            resistances: self.resistances.iter().map(|r| r * factor).collect(),
            tau: self.tau.iter().map(|t| t * factor).collect(),
            sum_tau: self.sum_tau * factor,
        }
    }

    /// Rounds each tau up to the nearest multiple of 1/n so random numbers of
    /// bounded precision suffice; adds at most m/n to the total.
    pub fn rounded_to_n_inverse(&self, g: &Graph) -> Self {
        let step = 1.0 / g.n() as f64;
        let tau: Vec<f64> = self
            .tau
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    0.0
                } else {
                    (t / step).ceil() * step
                }
            })
            .collect();
        let resistances = g
            .edges()
            .iter()
            .zip(&tau)
            .map(|(e, &t)| if e.is_loop() { 0.0 } else { t / e.w })
            .collect();
        let sum_tau = tau.iter().sum();
        ResistanceBounds {
            resistances,
            tau,
            sum_tau,
        }
    }
}

/// Dense exact-resistance oracle: pair queries against the pseudoinverse.
pub struct ExactResistances {
    pinv: crate::graph::DenseMatrix,
    comp: Vec<usize>,
}

impl ExactResistances {
    pub fn new(g: &Graph) -> Self {
        ExactResistances {
            pinv: pseudoinverse(&g.laplacian()),
            comp: g.components(),
        }
    }

    /// chi_uv^T L^+ chi_uv; +inf across components, 0 for u = v.
    pub fn query(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        if self.comp[u] != self.comp[v] {
            return f64::INFINITY;
        }
        (self.pinv[(u, u)] + self.pinv[(v, v)] - 2.0 * self.pinv[(u, v)]).max(0.0)
    }
}

pub fn exact_resistance(g: &Graph, u: usize, v: usize) -> f64 {
    ExactResistances::new(g).query(u, v)
}

/// Exact leverage scores tau_e = w_e R_eff(e); their total is n - c where c
/// is the number of connected components.
pub fn leverage_scores(g: &Graph) -> ResistanceBounds {
    let oracle = ExactResistances::new(g);
    let r = g
        .edges()
        .iter()
        .map(|e| if e.is_loop() { 0.0 } else { oracle.query(e.u, e.v) })
        .collect();
    ResistanceBounds::new(g, r).expect("exact resistances are finite on edges")
}

/// JL sketch of the resistance metric: q solved projection rows, each a
/// +-1/sqrt(q) combination of the weighted incidence rows pushed through L^+.
pub struct JlSketch {
    rows: Vec<Vec<f64>>,
    comp: Vec<usize>,
    delta: f64,
}

impl JlSketch {
    /// Raw estimate r_hat(u, v), a (1 +- delta) approximation w.h.p.
    pub fn query(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        if self.comp[u] != self.comp[v] {
            return f64::INFINITY;
        }
        self.rows
            .iter()
            .map(|y| {
                let d = y[u] - y[v];
                d * d
            })
            .sum()
    }

    /// Upper bound r_hat / (1 - delta), which dominates the true resistance
    /// whenever the raw estimate is within its (1 +- delta) band.
    pub fn query_upper(&self, u: usize, v: usize) -> f64 {
        self.query(u, v) / (1.0 - self.delta)
    }
}

/// Builds the sketch: q = ceil(c_jl ln n / delta^2) rows. Works on
/// disconnected graphs; cross-component queries return +inf.
pub fn jl_sketch(g: &Graph, delta: f64, seed: u64, c_jl: f64) -> Result<JlSketch> {
    if !(delta > 0.0 && delta <= 1.0 - 1e-9) {
        return Err(Error::InvalidArgument(
            "jl delta must be in (0, 1)".into(),
        ));
    }
    let n = g.n().max(2);
    let q = ((c_jl * (n as f64).ln()) / (delta * delta)).ceil() as usize;
    let q = q.max(1);
    let scale = 1.0 / (q as f64).sqrt();
    let forest = build_forest(g, seed, 4);
    let tree_pre = ForestPreconditioner::new(&forest);
    let diag_pre = DiagonalPreconditioner::new(g);
    let mut rng = substream(seed, Stream::JlSketch, 0);
    let max_iter = (4 * g.n()).max(500);
    let mut rows = Vec::with_capacity(q);
    for row in 0..q {
        let mut z = vec![0.0; g.n()];
        for e in g.edges() {
            if e.is_loop() {
                continue;
            }
            let s = if rng.random::<bool>() { scale } else { -scale };
            let c = s * e.w.sqrt();
            z[e.u] += c;
            z[e.v] -= c;
        }
        let y = match pcg_solve(g, &z, &tree_pre, PCG_TOL, max_iter, row) {
            Ok(y) => y,
            Err(_) => pcg_solve(g, &z, &diag_pre, PCG_TOL, 4 * max_iter, row)?,
        };
        rows.push(y);
    }
    Ok(JlSketch {
        rows,
        comp: g.components(),
        delta,
    })
}

/// Per-edge resistance upper bounds from the JL sketch. Requires a connected
/// graph; the returned bounds dominate the true resistances with probability
/// >= 1 - 1/n.
pub fn jl_resistance_bounds(g: &Graph, delta: f64, seed: u64) -> Result<ResistanceBounds> {
    if let Some((u, v)) = g.disconnected_pair() {
        return Err(Error::Disconnected(u, v));
    }
    let sketch = jl_sketch(g, delta, seed, C_JL_DEFAULT)?;
    let r = g
        .edges()
        .iter()
        .map(|e| {
            if e.is_loop() {
                0.0
            } else {
                sketch.query_upper(e.u, e.v)
            }
        })
        .collect();
    ResistanceBounds::new(g, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::graph::Edge;

    #[test]
    fn single_edge_resistance() {
        let g = Graph::new(2, vec![Edge::new(0, 1, 4.0)]).unwrap();
        assert!((exact_resistance(&g, 0, 1) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn triangle_resistance_two_thirds() {
        let g = gen::complete(3, 1.0);
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            assert!((exact_resistance(&g, u, v) - 2.0 / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn squared_path_disconnection_is_infinite() {
        let g2 = gen::path(3, 1.0).walk_graph_dense(2).unwrap();
        assert!(exact_resistance(&g2, 0, 1).is_infinite());
        assert!((exact_resistance(&g2, 0, 2) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn tree_leverage_scores_are_one() {
        let g = gen::random_weighted_connected(10, 0.0, 5);
        let lv = leverage_scores(&g);
        for i in 0..g.m() {
            assert!((lv.tau(i) - 1.0).abs() < 1e-9);
        }
        assert!((lv.sum_tau() - 9.0).abs() < 1e-8);
    }

    #[test]
    fn k3_leverage_scores() {
        let lv = leverage_scores(&gen::complete(3, 1.0));
        for i in 0..3 {
            assert!((lv.tau(i) - 2.0 / 3.0).abs() < 1e-10);
        }
        assert!((lv.sum_tau() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn foster_per_component() {
        // Two disjoint edges on 4 vertices: total = n - 2.
        let g = Graph::new(4, vec![Edge::new(0, 1, 3.0), Edge::new(2, 3, 0.5)]).unwrap();
        let lv = leverage_scores(&g);
        assert!((lv.sum_tau() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn foster_on_random_connected_graphs() {
        for seed in 0..10u64 {
            let g = gen::random_weighted_connected(4 + (seed as usize) * 5, 0.3, seed);
            let lv = leverage_scores(&g);
            let want = (g.n() - 1) as f64;
            assert!((lv.sum_tau() - want).abs() <= 1e-8 * want);
        }
    }

    #[test]
    fn rayleigh_monotonicity_under_deletion() {
        let g = gen::random_weighted_connected(8, 0.5, 12);
        let before = ExactResistances::new(&g);
        for skip in 0..g.m() {
            let edges: Vec<Edge> = g
                .edges()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, e)| *e)
                .collect();
            let h = Graph::new(8, edges).unwrap();
            let after = ExactResistances::new(&h);
            for u in 0..8 {
                for v in (u + 1)..8 {
                    assert!(after.query(u, v) >= before.query(u, v) - 1e-9);
                }
            }
        }
    }

    #[test]
    fn resistance_triangle_inequality() {
        for seed in 0..5u64 {
            let g = gen::random_weighted_connected(8, 0.4, seed + 100);
            let er = ExactResistances::new(&g);
            for u in 0..8 {
                for v in 0..8 {
                    for w in 0..8 {
                        assert!(er.query(u, w) <= er.query(u, v) + er.query(v, w) + 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn walk_graph_resistance_sandwich() {
        for seed in 0..3u64 {
            let g = gen::gnp_connected(8, 0.4, seed + 50);
            let er_g = ExactResistances::new(&g);
            let g2 = g.walk_graph_dense(2).unwrap();
            let er_g2 = ExactResistances::new(&g2);
            for k in [3usize, 5] {
                let gk = g.walk_graph_dense(k).unwrap();
                let er_k = ExactResistances::new(&gk);
                for u in 0..8 {
                    for v in (u + 1)..8 {
                        assert!(er_k.query(u, v) <= 2.0 * er_g.query(u, v) + 1e-9);
                    }
                }
            }
            for k in [4usize, 6] {
                let gk = g.walk_graph_dense(k).unwrap();
                let er_k = ExactResistances::new(&gk);
                for u in 0..8 {
                    for v in (u + 1)..8 {
                        let bound = er_g2.query(u, v);
                        if bound.is_finite() {
                            assert!(er_k.query(u, v) <= bound + 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn double_cover_resistance_identity() {
        for seed in 0..5u64 {
            let g = gen::random_weighted_connected(9, 0.4, seed + 30);
            let g2 = g.walk_graph_dense(2).unwrap();
            let er_g2 = ExactResistances::new(&g2);
            let dc = g.double_cover();
            let er_dc = ExactResistances::new(&dc);
            for u in 0..9 {
                for v in (u + 1)..9 {
                    let a = er_g2.query(u, v);
                    let b = er_dc.query(u, v);
                    if a.is_finite() {
                        assert!((a - b).abs() <= 1e-8 * a.max(1.0), "{} vs {}", a, b);
                    } else {
                        assert!(b.is_infinite());
                    }
                }
            }
        }
    }

    #[test]
    fn jl_single_edge() {
        let g = Graph::new(2, vec![Edge::new(0, 1, 2.0)]).unwrap();
        let b = jl_resistance_bounds(&g, 0.5, 0).unwrap();
        assert!(b.resistance(0) >= 0.5 - 1e-9);
        assert!(b.resistance(0) <= 1.5 + 1e-9);
    }

    #[test]
    fn jl_on_tree_dominates_exact_mostly() {
        let g = gen::random_weighted_connected(50, 0.0, 77);
        let exact = leverage_scores(&g);
        let mut good = 0;
        for seed in 0..100u64 {
            let b = jl_resistance_bounds(&g, 0.5, seed).unwrap();
            let ok = (0..g.m()).all(|i| {
                let r = b.resistance(i);
                let ex = exact.resistance(i);
                r >= ex - 1e-12 && r <= 3.0 * ex + 1e-12
            });
            if ok {
                good += 1;
            }
        }
        assert!(good >= 95, "only {}/100 runs dominated", good);
    }

    #[test]
    fn jl_raw_estimates_concentrate() {
        // Per-edge concentration: the (1 +- delta) band holds for the vast
        // majority of (seed, edge) pairs (whole-run success is a union bound
        // over ~200 edges and is not what the sketch promises).
        let g = gen::gnp_connected(50, 0.2, 5);
        let exact = leverage_scores(&g);
        let mut inside = 0usize;
        let mut total = 0usize;
        for seed in 0..50u64 {
            let sketch = jl_sketch(&g, 0.5, seed, C_JL_DEFAULT).unwrap();
            for (i, e) in g.edges().iter().enumerate() {
                let ratio = sketch.query(e.u, e.v) / exact.resistance(i);
                if (0.5..=1.5).contains(&ratio) {
                    inside += 1;
                }
                total += 1;
            }
        }
        assert!(
            inside as f64 >= 0.95 * total as f64,
            "only {}/{} edge estimates inside the band",
            inside,
            total
        );
    }

    #[test]
    fn jl_rejects_disconnected() {
        let g = Graph::new(4, vec![Edge::new(0, 1, 1.0), Edge::new(2, 3, 1.0)]).unwrap();
        assert!(matches!(
            jl_resistance_bounds(&g, 0.5, 0),
            Err(Error::Disconnected(_, _))
        ));
    }

    #[test]
    fn rounding_to_n_inverse() {
        let g = gen::gnp_connected(10, 0.4, 9);
        let lv = leverage_scores(&g);
        let rounded = lv.rounded_to_n_inverse(&g);
        let step = 0.1;
        for i in 0..g.m() {
            assert!(rounded.tau(i) >= lv.tau(i) - 1e-12);
            let q = rounded.tau(i) / step;
            assert!((q - q.round()).abs() < 1e-9);
        }
        assert!(rounded.sum_tau() - lv.sum_tau() <= g.m() as f64 / g.n() as f64 + 1e-12);
    }
}
