//! Sampling length-k walks and sparsifying the k-step walk graph without
//! ever materializing it.
//!
//! A walk is drawn by anchoring at a random edge (probability proportional
//! to w_e * r_e), placing it at a uniform position and orientation, and
//! extending both ends by degree-weighted steps. The resulting endpoint pair
//! enters the sparsifier with an importance weight that makes the output
//! Laplacian an unbiased estimate of L_{G^k}.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Adjacency, Edge, Graph};
use crate::resistance::{jl_sketch, ExactResistances, ResistanceBounds, C_JL_DEFAULT};
use crate::rng::{substream, uniform, Stream};
use crate::sparsify::{sample_count, SamplerConfig, DEFAULT_TREE_CANDIDATES};
use crate::tree::build_forest;

/// Relative accuracy of the JL estimator when used for walk bounds.
const WALK_JL_DELTA: f64 = 0.5;

const WALK_CHUNK: u64 = 1 << 14;

/// How per-edge resistance upper bounds for the walk graph are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResistanceEstimator {
    /// Dense pseudoinverse; oracle-quality, cubic in n.
    Exact,
    /// Johnson-Lindenstrauss sketch with solved projection rows.
    Jl,
    /// Path resistances in a low-stretch spanning tree.
    Tree,
}

impl std::str::FromStr for ResistanceEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ResistanceEstimator::Exact),
            "jl" => Ok(ResistanceEstimator::Jl),
            "tree" => Ok(ResistanceEstimator::Tree),
            other => Err(Error::InvalidArgument(format!(
                "unknown estimator '{}' (expected exact, jl, or tree)",
                other
            ))),
        }
    }
}

impl std::fmt::Display for ResistanceEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ResistanceEstimator::Exact => "exact",
            ResistanceEstimator::Jl => "jl",
            ResistanceEstimator::Tree => "tree",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WalkReport {
    pub n: usize,
    pub k: usize,
    pub parity: String,
    pub estimator: String,
    pub m_in: usize,
    pub m_out: usize,
    #[serde(rename = "N")]
    pub walks_sampled: u64,
    pub self_loops_dropped: u64,
    pub self_loop_fraction: f64,
    pub sum_tau: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub elapsed_ms: u64,
}

/// Per-edge resistance upper bounds r_e valid for the k-step walk graph:
/// twice the resistance in G for odd k, the double-cover resistance between
/// the two lifts of the edge for even k.
pub fn walk_resistance_bounds(
    g: &Graph,
    k: usize,
    estimator: ResistanceEstimator,
    seed: u64,
) -> Result<ResistanceBounds> {
    if k < 1 {
        return Err(Error::InvalidArgument("walk length k must be >= 1".into()));
    }
    let r = if k % 2 == 1 {
        let q = pair_estimator(g, estimator, seed)?;
        g.edges()
            .iter()
            .map(|e| if e.is_loop() { 0.0 } else { 2.0 * q(e.u, e.v) })
            .collect::<Vec<f64>>()
    } else {
        let dc = g.double_cover();
        let q = pair_estimator(&dc, estimator, seed)?;
        let n = g.n();
        g.edges()
            .iter()
            .map(|e| if e.is_loop() { 0.0 } else { q(e.u, e.v + n) })
            .collect::<Vec<f64>>()
    };
    ResistanceBounds::new(g, r)
}

/// Resistance-upper-bound query closure for arbitrary vertex pairs of `h`.
fn pair_estimator<'a>(
    h: &'a Graph,
    estimator: ResistanceEstimator,
    seed: u64,
) -> Result<Box<dyn Fn(usize, usize) -> f64 + 'a>> {
    match estimator {
        ResistanceEstimator::Exact => {
            let oracle = ExactResistances::new(h);
            Ok(Box::new(move |u, v| oracle.query(u, v)))
        }
        ResistanceEstimator::Jl => {
            let sketch = jl_sketch(h, WALK_JL_DELTA, seed, C_JL_DEFAULT)?;
            Ok(Box::new(move |u, v| sketch.query_upper(u, v)))
        }
        ResistanceEstimator::Tree => {
            let forest = build_forest(h, seed, DEFAULT_TREE_CANDIDATES);
            Ok(Box::new(move |u, v| forest.path_resistance(u, v)))
        }
    }
}

/// Anchor-selection tables over aggregated non-loop vertex pairs. The pair
/// resistance is tau_pair / w_pair, the consistent per-step value when
/// parallel edges carry different bounds.
struct AnchorTable {
    pairs: Vec<(usize, usize)>,
    prefix: Vec<f64>,
    r_pair: HashMap<(usize, usize), f64>,
    total_tau: f64,
}

fn pair_key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

fn build_anchor_table(g: &Graph, bounds: &ResistanceBounds) -> Result<AnchorTable> {
    if bounds.len() != g.m() {
        return Err(Error::InvalidArgument(
            "bounds are not aligned with the graph's edges".into(),
        ));
    }
    let mut agg: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    for (i, e) in g.edges().iter().enumerate() {
        if e.is_loop() {
            continue;
        }
        let ent = agg.entry(pair_key(e.u, e.v)).or_insert((0.0, 0.0));
        ent.0 += e.w;
        ent.1 += bounds.tau(i);
    }
    let mut pairs = Vec::new();
    let mut prefix = Vec::new();
    let mut r_pair = HashMap::new();
    let mut acc = 0.0;
    for (&key, &(w, tau)) in &agg {
        r_pair.insert(key, tau / w);
        if tau > 0.0 {
            acc += tau;
            pairs.push(key);
            prefix.push(acc);
        }
    }
    if !(acc > 0.0) {
        return Err(Error::InvalidArgument(
            "all anchor masses are zero; nothing to sample".into(),
        ));
    }
    Ok(AnchorTable {
        pairs,
        prefix,
        r_pair,
        total_tau: acc,
    })
}

/// Draws one length-k walk into `buf` (k + 1 vertices) and returns the sum
/// of pair resistances over its steps. Draw order: anchor pair, position,
/// orientation, backward steps, forward steps.
fn draw_walk(
    rng: &mut ChaCha8Rng,
    adj: &Adjacency,
    table: &AnchorTable,
    k: usize,
    buf: &mut Vec<usize>,
) -> f64 {
    buf.clear();
    buf.resize(k + 1, 0);
    let x = uniform(rng, table.total_tau);
    let idx = table
        .prefix
        .partition_point(|&p| p <= x)
        .min(table.pairs.len() - 1);
    let (mut a, mut b) = table.pairs[idx];
    let i = rng.random_range(0..k);
    if rng.random::<bool>() {
        std::mem::swap(&mut a, &mut b);
    }
    buf[i] = a;
    buf[i + 1] = b;
    let mut sum_r = table.r_pair[&pair_key(a, b)];
    for j in (0..i).rev() {
        let u = buf[j + 1];
        let v = random_step(rng, adj, u);
        buf[j] = v;
        if v != u {
            sum_r += table.r_pair[&pair_key(u, v)];
        }
    }
    for j in (i + 2)..=k {
        let u = buf[j - 1];
        let v = random_step(rng, adj, u);
        buf[j] = v;
        if v != u {
            sum_r += table.r_pair[&pair_key(u, v)];
        }
    }
    sum_r
}

fn random_step(rng: &mut ChaCha8Rng, adj: &Adjacency, u: usize) -> usize {
    let pr = &adj.prefix[u];
    let x = uniform(rng, adj.degree[u]);
    let j = pr.partition_point(|&p| p <= x).min(pr.len() - 1);
    adj.neighbors[u][j].0
}

/// Sparsifies the k-step walk graph G^k, never building it: bounds come from
/// the chosen estimator, N = ceil(C eps^-2 ln n * k * sum tau) walks are
/// drawn, and each contributes k * sum_tau / (N * sum_i r_i) to its endpoint
/// pair. Walks that close into a self-loop carry no Laplacian mass and are
/// dropped (their fraction is reported).
pub fn sparsify_gk(
    g: &Graph,
    k: usize,
    cfg: &SamplerConfig,
    estimator: ResistanceEstimator,
) -> Result<(Graph, WalkReport)> {
    let bounds = walk_resistance_bounds(g, k, estimator, cfg.seed)?;
    sparsify_gk_with_bounds(g, k, cfg, &bounds, &estimator.to_string())
}

/// `sparsify_gk` with caller-supplied bounds (the estimator label only
/// annotates the report).
pub fn sparsify_gk_with_bounds(
    g: &Graph,
    k: usize,
    cfg: &SamplerConfig,
    bounds: &ResistanceBounds,
    estimator_label: &str,
) -> Result<(Graph, WalkReport)> {
    let start = std::time::Instant::now();
    cfg.validate()?;
    if k < 1 {
        return Err(Error::InvalidArgument("walk length k must be >= 1".into()));
    }
    let table = build_anchor_table(g, bounds)?;
    let n_samples = sample_count(g.n(), k as f64 * table.total_tau, cfg).max(1);
    let numer = k as f64 * table.total_tau / n_samples as f64;
    let adj = g.adjacency();

    // Aggregated edge weights plus the number of closed walks in a chunk.
    type ChunkPartial = (BTreeMap<(usize, usize), f64>, u64);

    let chunks = n_samples.div_ceil(WALK_CHUNK);
    // Per-chunk partial results are merged in chunk order so the floating
    // point totals are independent of the thread count.
    let partials: Vec<ChunkPartial> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * WALK_CHUNK;
            let hi = ((chunk + 1) * WALK_CHUNK).min(n_samples);
            let mut rng = substream(cfg.seed, Stream::WalkExtension, chunk);
            let mut buf = Vec::with_capacity(k + 1);
            let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
            let mut loops = 0u64;
            for _ in lo..hi {
                let sum_r = draw_walk(&mut rng, adj, &table, k, &mut buf);
                let (u0, uk) = (buf[0], buf[k]);
                if u0 == uk {
                    loops += 1;
                } else {
                    *weights.entry(pair_key(u0, uk)).or_insert(0.0) += numer / sum_r;
                }
            }
            (weights, loops)
        })
        .collect();

    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut loops = 0u64;
    for (part, l) in partials {
        loops += l;
        for (key, w) in part {
            *weights.entry(key).or_insert(0.0) += w;
        }
    }

    let edges: Vec<Edge> = weights
        .into_iter()
        .map(|((u, v), w)| Edge::new(u, v, w))
        .collect();
    let m_out = edges.len();
    let h = Graph::new(g.n(), edges)?;
    let report = WalkReport {
        n: g.n(),
        k,
        parity: if k % 2 == 1 { "odd" } else { "even" }.to_string(),
        estimator: estimator_label.to_string(),
        m_in: g.m(),
        m_out,
        walks_sampled: n_samples,
        self_loops_dropped: loops,
        self_loop_fraction: loops as f64 / n_samples as f64,
        sum_tau: table.total_tau,
        epsilon: cfg.epsilon,
        seed: cfg.seed,
        elapsed_ms: start.elapsed().as_millis() as u64,
    };
    Ok((h, report))
}

/// Analytic probability that the sampler emits the given ordered walk:
/// w_S * (sum of step pair resistances) / (2 k <w, r>).
pub fn walk_probability(g: &Graph, bounds: &ResistanceBounds, walk: &[usize]) -> Result<f64> {
    if walk.len() < 2 {
        return Err(Error::InvalidArgument(
            "walk must have length at least 1".into(),
        ));
    }
    let k = walk.len() - 1;
    let table = build_anchor_table(g, bounds)?;
    let w_s = g.walk_weight(walk)?;
    let mut sum_r = 0.0;
    for i in 0..k {
        if walk[i] != walk[i + 1] {
            sum_r += table.r_pair[&pair_key(walk[i], walk[i + 1])];
        }
    }
    Ok(w_s * sum_r / (2.0 * k as f64 * table.total_tau))
}

/// Draws `count` full walks sequentially with the sampler's exact draw order;
/// oracle use (empirical distribution checks).
pub fn sample_walks(
    g: &Graph,
    bounds: &ResistanceBounds,
    k: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if k < 1 {
        return Err(Error::InvalidArgument("walk length k must be >= 1".into()));
    }
    let table = build_anchor_table(g, bounds)?;
    let adj = g.adjacency();
    let mut rng = substream(seed, Stream::WalkExtension, 0);
    let mut buf = Vec::with_capacity(k + 1);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        draw_walk(&mut rng, adj, &table, k, &mut buf);
        out.push(buf.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::oracle::{
        is_eps_sparsifier, sampler_distribution, DEFAULT_ENUM_CAP,
    };
    use crate::resistance::leverage_scores;

    #[test]
    fn odd_bounds_double_base_resistance() {
        let g = gen::complete(3, 1.0);
        let b = walk_resistance_bounds(&g, 3, ResistanceEstimator::Exact, 0).unwrap();
        for i in 0..3 {
            assert!((b.resistance(i) - 4.0 / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn even_bounds_use_double_cover() {
        // Double cover of P3 splits into two paths; the lifted edge (0, 1+n)
        // sits on a 2-edge path end, resistance 1.
        let g = gen::path(3, 1.0);
        let b = walk_resistance_bounds(&g, 2, ResistanceEstimator::Exact, 0).unwrap();
        assert!((b.resistance(0) - 1.0).abs() < 1e-10);
        assert!((b.resistance(1) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sampler_matches_analytic_distribution() {
        // The decision-tree fold in the oracle and the closed form
        // w_S sum_r / (2k <w, r>) must agree walk by walk.
        for (g, kmax) in [
            (gen::path(3, 1.0), 3usize),
            (gen::complete(3, 1.0), 3),
            (gen::gnp_connected(6, 0.5, 7), 3),
        ] {
            for k in 1..=kmax {
                let bounds = walk_resistance_bounds(&g, k, ResistanceEstimator::Exact, 0).unwrap();
                let dist = sampler_distribution(&g, &bounds, k, DEFAULT_ENUM_CAP).unwrap();
                let mut total = 0.0;
                let mut tv = 0.0;
                for (walk, &p) in &dist {
                    let q = walk_probability(&g, &bounds, walk).unwrap();
                    tv += (p - q).abs();
                    total += p;
                }
                assert!((total - 1.0).abs() < 1e-12, "k={} total={}", k, total);
                assert!(tv / 2.0 < 1e-12, "k={} tv={}", k, tv);
            }
        }
    }

    #[test]
    fn empirical_walks_match_distribution() {
        let g = gen::path(3, 1.0);
        let bounds = walk_resistance_bounds(&g, 2, ResistanceEstimator::Exact, 0).unwrap();
        let dist = sampler_distribution(&g, &bounds, 2, DEFAULT_ENUM_CAP).unwrap();
        let samples = 200_000usize;
        let walks = sample_walks(&g, &bounds, 2, samples, 11).unwrap();
        let mut freq: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for w in walks {
            *freq.entry(w).or_insert(0.0) += 1.0 / samples as f64;
        }
        let mut tv = 0.0;
        for (walk, &p) in &dist {
            tv += (p - freq.get(walk).copied().unwrap_or(0.0)).abs();
        }
        assert!(tv / 2.0 < 0.01, "tv={}", tv / 2.0);
    }

    #[test]
    fn p3_k2_unbiased_mean() {
        // L of P3^2 restricted to non-loop mass:
        // [[0.5, 0, -0.5], [0, 0, 0], [-0.5, 0, 0.5]].
        let g = gen::path(3, 1.0);
        let target = g.walk_graph_dense(2).unwrap().laplacian();
        assert!((target[(0, 2)] + 0.5).abs() < 1e-12);
        let runs = 400usize;
        let mut mean = nalgebra::DMatrix::<f64>::zeros(3, 3);
        let mut m2 = nalgebra::DMatrix::<f64>::zeros(3, 3);
        for run in 0..runs {
            let cfg = SamplerConfig::new(0.5, run as u64);
            let (h, _) = sparsify_gk(&g, 2, &cfg, ResistanceEstimator::Exact).unwrap();
            let l = h.laplacian();
            let delta = &l - &mean;
            mean += &delta / (run as f64 + 1.0);
            m2 += delta.component_mul(&(&l - &mean));
        }
        for i in 0..3 {
            for j in 0..3 {
                let se = (m2[(i, j)] / (runs as f64 - 1.0)).sqrt() / (runs as f64).sqrt();
                let diff = (mean[(i, j)] - target[(i, j)]).abs();
                assert!(
                    diff <= 4.0 * se + 1e-9,
                    "entry ({}, {}): diff {} vs se {}",
                    i,
                    j,
                    diff,
                    se
                );
            }
        }
    }

    #[test]
    fn self_loops_are_dropped() {
        let g = gen::path(3, 1.0);
        let cfg = SamplerConfig::new(0.5, 3);
        let (h, report) = sparsify_gk(&g, 2, &cfg, ResistanceEstimator::Exact).unwrap();
        assert!(h.edges().iter().all(|e| !e.is_loop()));
        assert_eq!(h.m(), 1);
        assert_eq!(h.edges()[0].u, 0);
        assert_eq!(h.edges()[0].v, 2);
        // P3^2 puts 3/4 of its walk mass on loops.
        assert!(report.self_loop_fraction > 0.5);
        assert_eq!(
            report.self_loops_dropped,
            (report.self_loop_fraction * report.walks_sampled as f64).round() as u64
        );
    }

    #[test]
    fn k1_recovers_static_sparsification() {
        let g = gen::gnp_connected(40, 0.3, 5);
        let mut good = 0;
        for seed in 0..10u64 {
            let cfg = SamplerConfig::new(0.5, seed);
            let (h, report) = sparsify_gk(&g, 1, &cfg, ResistanceEstimator::Exact).unwrap();
            assert_eq!(report.parity, "odd");
            if is_eps_sparsifier(&g, &h, 0.5).unwrap() {
                good += 1;
            }
        }
        assert!(good >= 8, "only {}/10", good);
    }

    #[test]
    fn even_k_sparsifier_quality() {
        let g = gen::gnp_connected(30, 0.4, 3);
        let g2 = g.walk_graph_dense(2).unwrap();
        let mut good = 0;
        for seed in 0..10u64 {
            let cfg = SamplerConfig::new(0.5, seed);
            let (h, report) = sparsify_gk(&g, 2, &cfg, ResistanceEstimator::Exact).unwrap();
            assert_eq!(report.parity, "even");
            if is_eps_sparsifier(&g2, &h, 0.5).unwrap() {
                good += 1;
            }
        }
        assert!(good >= 8, "only {}/10", good);
    }

    #[test]
    fn jl_and_tree_estimators_work() {
        let g = gen::gnp_connected(20, 0.4, 9);
        let g3 = g.walk_graph_dense(3).unwrap();
        for est in [ResistanceEstimator::Jl, ResistanceEstimator::Tree] {
            let mut good = 0;
            for seed in 0..5u64 {
                let cfg = SamplerConfig::new(0.5, seed);
                let (h, _) = sparsify_gk(&g, 3, &cfg, est).unwrap();
                if is_eps_sparsifier(&g3, &h, 0.5).unwrap() {
                    good += 1;
                }
            }
            assert!(good >= 4, "{}: only {}/5", est, good);
        }
    }

    #[test]
    fn odd_bounds_dominate_walk_graph_resistances_per_edge() {
        // Odd k: r_e = 2 R_G(e) >= R_{G^k}(e) edge by edge.
        let g = gen::gnp_connected(12, 0.5, 2);
        let k = 3;
        let gk = g.walk_graph_dense(k).unwrap();
        let exact = leverage_scores(&gk);
        let mut true_r: HashMap<(usize, usize), f64> = HashMap::new();
        for (i, e) in gk.edges().iter().enumerate() {
            if !e.is_loop() {
                true_r.insert(pair_key(e.u, e.v), exact.resistance(i));
            }
        }
        let b = walk_resistance_bounds(&g, k, ResistanceEstimator::Exact, 0).unwrap();
        for (i, e) in g.edges().iter().enumerate() {
            if let Some(&r) = true_r.get(&pair_key(e.u, e.v)) {
                assert!(
                    b.resistance(i) >= r - 1e-9,
                    "edge {}: {} < {}",
                    i,
                    b.resistance(i),
                    r
                );
            }
        }
    }

    #[test]
    fn step_sums_dominate_walk_graph_resistances() {
        // Both parities: along every length-k walk, the sum of per-step
        // bounds dominates R_{G^k} between the endpoints (the double-cover
        // bounds are only claimed to dominate through the triangle
        // inequality, not edge by edge).
        let g = gen::gnp_connected(8, 0.5, 2);
        for k in [2usize, 3, 4] {
            let gk = g.walk_graph_dense(k).unwrap();
            let er = crate::resistance::ExactResistances::new(&gk);
            let bounds = walk_resistance_bounds(&g, k, ResistanceEstimator::Exact, 0).unwrap();
            let table = build_anchor_table(&g, &bounds).unwrap();
            for (walk, _) in
                crate::oracle::enumerate_walks(&g, k, DEFAULT_ENUM_CAP).unwrap()
            {
                let (u0, uk) = (walk[0], walk[k]);
                if u0 == uk {
                    continue;
                }
                let sum_r: f64 = (0..k)
                    .map(|i| table.r_pair[&pair_key(walk[i], walk[i + 1])])
                    .sum();
                let true_r = er.query(u0, uk);
                assert!(
                    sum_r >= true_r - 1e-9,
                    "k={} walk {:?}: {} < {}",
                    k,
                    walk,
                    sum_r,
                    true_r
                );
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_in_seed() {
        let g = gen::gnp_connected(25, 0.3, 1);
        let cfg = SamplerConfig::new(0.5, 12);
        let (a, _) = sparsify_gk(&g, 3, &cfg, ResistanceEstimator::Exact).unwrap();
        let (b, _) = sparsify_gk(&g, 3, &cfg, ResistanceEstimator::Exact).unwrap();
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn invalid_k_rejected() {
        let g = gen::path(3, 1.0);
        let cfg = SamplerConfig::new(0.5, 0);
        assert!(sparsify_gk(&g, 0, &cfg, ResistanceEstimator::Exact).is_err());
    }
}
