//! Static-graph sparsification: leverage-bound importance sampling, the
//! tree-guided sparsifier, and the density-independent chain built from a
//! single low-stretch subgraph.

use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::resistance::{jl_resistance_bounds, leverage_scores, ResistanceBounds};
use crate::rng::{mix, substream, Stream};
use crate::tree::{build_tree, split_high_stretch, RootedTree};
use crate::DEFAULT_ORACLE_CAP;

/// Number of candidate spanning trees tried per tree construction.
pub const DEFAULT_TREE_CANDIDATES: usize = 8;

/// Relative accuracy of JL resistance estimates used inside the chain.
const CHAIN_JL_DELTA: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
pub struct SamplerConfig {
    /// Target error, in (0, 1).
    pub epsilon: f64,
    /// Oversampling constant in N = ceil(C eps^-2 ln n * sum tau).
    pub oversample_c: f64,
    pub seed: u64,
    /// Round tau values up to multiples of 1/n before sampling.
    pub round_to_n_inverse: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            epsilon: 0.5,
            oversample_c: 9.0,
            seed: 0,
            round_to_n_inverse: false,
        }
    }
}

impl SamplerConfig {
    pub fn new(epsilon: f64, seed: u64) -> Self {
        SamplerConfig {
            epsilon,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.oversample_c > 0.0) {
            return Err(Error::InvalidArgument(
                "oversample constant must be positive".into(),
            ));
        }
        Ok(())
    }

    fn with_epsilon(&self, epsilon: f64) -> Self {
        SamplerConfig { epsilon, ..*self }
    }

    fn with_seed(&self, seed: u64) -> Self {
        SamplerConfig { seed, ..*self }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SparsifyReport {
    pub n: usize,
    pub m_in: usize,
    pub m_out: usize,
    #[serde(rename = "N")]
    pub sample_count: u64,
    pub sum_tau: f64,
    pub epsilon: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_measured: Option<f64>,
    pub elapsed_ms: u64,
}

/// Draws N = ceil(C eps^-2 ln n * sum tau) independent edge samples with
/// probabilities p_e = tau_e / sum tau, adding each sampled edge with the
/// unbiased weight w_e / (N p_e). The per-edge counts are generated in one
/// linear pass (see [`draw_counts`]), so the cost is O(m), not O(N). The output
/// Laplacian has expectation exactly L_G. Samples landing on the same edge
/// are merged, so the output has at most min(N, m) edges.
pub fn ideal_sample(
    g: &Graph,
    bounds: &ResistanceBounds,
    cfg: &SamplerConfig,
) -> Result<(Graph, SparsifyReport)> {
    let start = std::time::Instant::now();
    cfg.validate()?;
    if bounds.len() != g.m() {
        return Err(Error::InvalidArgument(
            "bounds are not aligned with the graph's edges".into(),
        ));
    }
    let rounded;
    let bounds = if cfg.round_to_n_inverse {
        rounded = bounds.rounded_to_n_inverse(g);
        &rounded
    } else {
        bounds
    };
    let sum_tau = bounds.sum_tau();
    if !(sum_tau > 0.0) {
        return Err(Error::InvalidArgument(
            "all leverage bounds are zero; nothing to sample".into(),
        ));
    }
    let n_samples = sample_count(g.n(), sum_tau, cfg);
    let counts = draw_counts(bounds.taus(), sum_tau, n_samples, cfg.seed);

    let mut edges = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let e = g.edges()[i];
        let p = bounds.tau(i) / sum_tau;
        edges.push(Edge::new(e.u, e.v, c as f64 * e.w / (n_samples as f64 * p)));
    }
    let m_out = edges.len();
    let out = Graph::new(g.n(), edges)?;
    Ok((
        out,
        SparsifyReport {
            n: g.n(),
            m_in: g.m(),
            m_out,
            sample_count: n_samples,
            sum_tau,
            epsilon: cfg.epsilon,
            seed: cfg.seed,
            kappa_measured: None,
            elapsed_ms: start.elapsed().as_millis() as u64,
        },
    ))
}

pub fn sample_count(n: usize, sum_tau: f64, cfg: &SamplerConfig) -> u64 {
    let ln_n = (n.max(2) as f64).ln();
    (cfg.oversample_c / (cfg.epsilon * cfg.epsilon) * ln_n * sum_tau).ceil() as u64
}

/// Per-edge multinomial sample counts, drawn as a chain of conditional
/// binomials in a single linear pass over the edges. This is exactly the
/// distribution of N independent categorical draws with p_e = tau_e / total,
/// but the cost is O(m) rather than O(N log m), so the amortized per-sample
/// cost does not grow with density.
fn draw_counts(tau: &[f64], total: f64, n_samples: u64, seed: u64) -> Vec<u64> {
    let mut rng = substream(seed, Stream::EdgeSampling, 0);
    let mut counts = vec![0u64; tau.len()];
    let mut remaining = n_samples;
    let mut tail = total;
    for (i, &t) in tau.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = if i + 1 == tau.len() { 1.0 } else { t / tail };
        let c = if !(p > 0.0) {
            0
        } else if p >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, p)
                .expect("valid binomial parameters")
                .sample(&mut rng)
        };
        counts[i] = c;
        remaining -= c;
        tail -= t;
    }
    counts
}

/// Tree-guided sparsification of `g` using a kappa-approximation `gp` as
/// guide: builds a low-stretch tree of `gp`, takes r_e = kappa * (tree path
/// resistance) as resistance upper bounds for `g`, and runs `ideal_sample`.
pub fn tree_sparsify(
    g: &Graph,
    gp: &Graph,
    kappa: f64,
    cfg: &SamplerConfig,
) -> Result<(Graph, ResistanceBounds, SparsifyReport)> {
    let (h, bounds, _, report) = tree_sparsify_inner(g, gp, kappa, cfg)?;
    Ok((h, bounds, report))
}

fn tree_sparsify_inner(
    g: &Graph,
    gp: &Graph,
    kappa: f64,
    cfg: &SamplerConfig,
) -> Result<(Graph, ResistanceBounds, RootedTree, SparsifyReport)> {
    if kappa < 1.0 {
        return Err(Error::InvalidArgument("kappa must be >= 1".into()));
    }
    let tree = build_tree(gp, cfg.seed, DEFAULT_TREE_CANDIDATES)?;
    let bounds = tree_bounds(g, &tree, kappa);
    let (h, report) = ideal_sample(g, &bounds, cfg)?;
    Ok((h, bounds, tree, report))
}

/// r_e = kappa * (path resistance in `tree` between e's endpoints).
fn tree_bounds(g: &Graph, tree: &RootedTree, kappa: f64) -> ResistanceBounds {
    let r: Vec<f64> = g
        .edges()
        .iter()
        .map(|e| {
            if e.is_loop() {
                0.0
            } else {
                kappa * tree.path_resistance(e.u, e.v)
            }
        })
        .collect();
    ResistanceBounds::new(g, r).expect("tree bounds are finite on a spanning tree")
}

/// One level of the chain, kept for oracle inspection.
pub struct ChainLevel {
    /// log2 of the tree scale at this level.
    pub scale_log2: u32,
    /// The materialized level graph G_hat + 2^i T.
    pub target: Graph,
    /// The sparsifier produced for it.
    pub sparsifier: Graph,
    /// Epsilon budget this level's sparsifier was sampled at.
    pub epsilon: f64,
    /// Sum of leverage bounds used at this level.
    pub sum_tau: f64,
}

pub struct ChainTrace {
    pub levels: Vec<ChainLevel>,
    /// Edges split off before the chain and sparsified independently.
    pub removed_edges: usize,
}

/// Density-independent sparsification via the graph chain G_hat + 2^i T.
///
/// High-stretch edges are split off first, the heaviest-scaled level is
/// sparsified directly from tree stretch bounds, and each following level is
/// sparsified guided by the previous one. Sparse or tiny inputs bypass the
/// chain entirely.
pub fn chain_sparsify(
    g: &Graph,
    cfg: &SamplerConfig,
) -> Result<(Graph, ResistanceBounds, SparsifyReport)> {
    let (h, b, r, _) = chain_sparsify_traced(g, cfg)?;
    Ok((h, b, r))
}

pub fn chain_sparsify_traced(
    g: &Graph,
    cfg: &SamplerConfig,
) -> Result<(Graph, ResistanceBounds, SparsifyReport, ChainTrace)> {
    let start = std::time::Instant::now();
    cfg.validate()?;
    if let Some((u, v)) = g.disconnected_pair() {
        return Err(Error::Disconnected(u, v));
    }
    let n = g.n();
    if n < 4 || g.m() <= 2 * n {
        // The chain buys nothing on sparse inputs.
        let bounds = exact_or_jl_bounds(g, cfg.seed)?;
        let (h, mut report) = ideal_sample(g, &bounds, cfg)?;
        report.elapsed_ms = start.elapsed().as_millis() as u64;
        let trace = ChainTrace {
            levels: Vec::new(),
            removed_edges: 0,
        };
        return Ok((h, bounds, report, trace));
    }

    let eps_half = cfg.epsilon / 2.0;
    let log2n = (n as f64).log2();
    let fraction = 1.0 / (log2n * log2n);
    let tree = build_tree(g, cfg.seed, DEFAULT_TREE_CANDIDATES)?;
    let (ghat, removed) = split_high_stretch(g, &tree, fraction)?;
    let i_max = log2n.log2().ceil().max(1.0) as u32;

    let mut total_samples = 0u64;
    let mut levels = Vec::new();

    // Base level: bounds straight from the scaled tree's stretch.
    let base_scale = (1u64 << i_max) as f64;
    let base_graph = level_graph(&ghat, &tree, base_scale);
    let base_bounds = scaled_tree_bounds(&base_graph, &tree, base_scale);
    let base_cfg = cfg.with_epsilon(eps_half).with_seed(mix(cfg.seed, 1000));
    let (mut h, base_report) = ideal_sample(&base_graph, &base_bounds, &base_cfg)?;
    total_samples += base_report.sample_count;
    levels.push(ChainLevel {
        scale_log2: i_max,
        target: base_graph,
        sparsifier: h.clone(),
        epsilon: eps_half,
        sum_tau: base_bounds.sum_tau(),
    });

    // The guide is off by at most two eps/2 sampling rounds plus the
    // factor-2 tree-scale gap between consecutive levels.
    let kappa_level = 2.0 * ((1.0 + eps_half) / (1.0 - eps_half)).powi(2);
    let mut last_tree = None;
    let mut kappa_last = kappa_level;
    for i in (0..i_max).rev() {
        let scale = (1u64 << i) as f64;
        let target = level_graph(&ghat, &tree, scale);
        let level_cfg = cfg
            .with_epsilon(eps_half)
            .with_seed(mix(cfg.seed, 2000 + i as u64));
        let (crude, _bounds, t, crude_report) =
            tree_sparsify_inner(&target, &h, kappa_level, &level_cfg)?;
        total_samples += crude_report.sample_count;
        let resparse_cfg = level_cfg.with_seed(mix(cfg.seed, 3000 + i as u64));
        let (next, sum_tau, extra) = resparsify(&crude, &resparse_cfg)?;
        total_samples += extra;
        h = next;
        last_tree = Some(t);
        kappa_last = kappa_level;
        levels.push(ChainLevel {
            scale_log2: i,
            target,
            sparsifier: h.clone(),
            epsilon: cfg.epsilon,
            sum_tau,
        });
    }

    // Add back the split-off edges, sparsified on their own.
    let mut out_edges = h.edges().to_vec();
    if removed.m() > 0 {
        let rem_bounds = exact_or_jl_bounds(&removed, mix(cfg.seed, 4000))?;
        let rem_cfg = cfg.with_seed(mix(cfg.seed, 4001));
        let (rem_h, rem_report) = ideal_sample(&removed, &rem_bounds, &rem_cfg)?;
        total_samples += rem_report.sample_count;
        out_edges.extend_from_slice(rem_h.edges());
    }
    let out = Graph::new(n, out_edges)?.aggregated();

    // Bounds for the original edge set, transferred through the last guide
    // tree: kappa_last * R_T dominates R on the level graph, and the level
    // graph is within a factor 2 of G, hence the extra doubling.
    let final_tree = last_tree.unwrap_or(tree);
    let bounds = tree_bounds(g, &final_tree, 2.0 * kappa_last);

    let report = SparsifyReport {
        n,
        m_in: g.m(),
        m_out: out.m(),
        sample_count: total_samples,
        sum_tau: bounds.sum_tau(),
        epsilon: cfg.epsilon,
        seed: cfg.seed,
        kappa_measured: None,
        elapsed_ms: start.elapsed().as_millis() as u64,
    };
    let trace = ChainTrace {
        levels,
        removed_edges: removed.m(),
    };
    Ok((out, bounds, report, trace))
}

/// G_hat + scale * T, represented by edge concatenation (G_hat edges first,
/// then the n - #trees tree edges).
fn level_graph(ghat: &Graph, tree: &RootedTree, scale: f64) -> Graph {
    let mut edges = ghat.edges().to_vec();
    edges.extend_from_slice(tree.as_graph(scale).edges());
    Graph::new(ghat.n(), edges).expect("level graph is valid")
}

/// Resistance bounds for a level graph from its own scaled tree: the scaled
/// tree is a subgraph, so its path resistances dominate.
fn scaled_tree_bounds(level: &Graph, tree: &RootedTree, scale: f64) -> ResistanceBounds {
    let r: Vec<f64> = level
        .edges()
        .iter()
        .map(|e| {
            if e.is_loop() {
                0.0
            } else {
                tree.path_resistance(e.u, e.v) / scale
            }
        })
        .collect();
    ResistanceBounds::new(level, r).expect("scaled tree bounds are finite")
}

/// Second sampling round that brings a crude sparsifier down to target size,
/// guided by JL resistance estimates. Falls back to the crude graph when
/// sampling happened to disconnect it.
fn resparsify(crude: &Graph, cfg: &SamplerConfig) -> Result<(Graph, f64, u64)> {
    match jl_resistance_bounds(crude, CHAIN_JL_DELTA, cfg.seed) {
        Ok(bounds) => {
            let (h, report) = ideal_sample(crude, &bounds, cfg)?;
            Ok((h, bounds.sum_tau(), report.sample_count))
        }
        Err(Error::Disconnected(_, _)) => Ok((crude.clone(), 0.0, 0)),
        Err(e) => Err(e),
    }
}

/// Exact leverage scores when the dense oracle is affordable, JL bounds when
/// connected, uniform tau = 1 otherwise (always valid: tau_e <= 1).
fn exact_or_jl_bounds(g: &Graph, seed: u64) -> Result<ResistanceBounds> {
    if g.n() <= DEFAULT_ORACLE_CAP {
        Ok(leverage_scores(g))
    } else if g.is_connected() {
        jl_resistance_bounds(g, CHAIN_JL_DELTA, seed)
    } else {
        Ok(ResistanceBounds::uniform(g, f64::INFINITY).scaled(0.0))
    }
}
