//! Command-line front end: generate test graphs, sparsify statically or
//! through walk sampling, dump resistance bounds, and verify sparsifiers
//! against the dense oracle.
//!
//! Exit codes: 0 success/verified, 1 verification failed, 2 usage error,
//! 3 oracle cap exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rwsparse::error::Error;
use rwsparse::graph::Graph;
use rwsparse::oracle::{kappa_target, sparsifier_kappa};
use rwsparse::resistance::{jl_resistance_bounds, leverage_scores, ResistanceBounds};
use rwsparse::sparsify::{chain_sparsify, ideal_sample, SamplerConfig, SparsifyReport};
use rwsparse::tree::build_forest;
use rwsparse::walk::{sparsify_gk, ResistanceEstimator};
use rwsparse::{gen, io, DEFAULT_ORACLE_CAP};

#[derive(Parser)]
#[command(name = "rwsparse", about = "Spectral sparsifiers of k-step random-walk graphs", version)]
struct Cli {
    /// Cap the rayon worker count (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test graph in the shared edge-list format.
    Generate(GenerateArgs),
    /// Sparsify a static graph (exact leverage scores or the chain).
    Sparsify(SparsifyArgs),
    /// Sparsify the k-step walk graph by walk sampling.
    WalkSparsify(WalkSparsifyArgs),
    /// Check whether one graph is an epsilon-sparsifier of another.
    Verify(VerifyArgs),
    /// Compute and dump per-edge resistance upper bounds.
    Resistance(ResistanceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Gnp,
    Path,
    Cycle,
    Star,
    Grid,
    Barbell,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: GraphKind,
    /// Vertex count (clique size for barbell).
    #[arg(long)]
    n: usize,
    /// Edge probability for gnp.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Grid rows (defaults to a square grid of n vertices).
    #[arg(long)]
    rows: Option<usize>,
    /// Grid columns.
    #[arg(long)]
    cols: Option<usize>,
    /// Uniform edge weight for the deterministic kinds.
    #[arg(long, default_value_t = 1.0)]
    weight: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SparsifyMode {
    /// Exact leverage scores through the dense oracle (small graphs).
    Exact,
    /// Density-independent chain of tree-guided sparsifiers.
    Chain,
}

#[derive(Args)]
struct SparsifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = SparsifyMode::Chain)]
    mode: SparsifyMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON run report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Vertex-count cap for dense oracle work.
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Exact,
    Jl,
    Tree,
}

impl From<EstimatorArg> for ResistanceEstimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Exact => ResistanceEstimator::Exact,
            EstimatorArg::Jl => ResistanceEstimator::Jl,
            EstimatorArg::Tree => ResistanceEstimator::Tree,
        }
    }
}

#[derive(Args)]
struct WalkSparsifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Jl)]
    estimator: EstimatorArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Reference graph.
    graph_a: PathBuf,
    /// Candidate sparsifier.
    graph_b: PathBuf,
    /// Compare against the k-step walk graph of the reference.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
}

#[derive(Args)]
struct ResistanceArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Exact)]
    estimator: EstimatorArg,
    /// JL accuracy parameter.
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        // Ignore "already built" from repeated initialization.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Sparsify(args) => cmd_sparsify(args),
        Command::WalkSparsify(args) => cmd_walk_sparsify(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Resistance(args) => cmd_resistance(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e);
            match e {
                Error::OracleCap(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<u8, Error> {
    let g = match args.kind {
        GraphKind::Gnp => gen::gnp(args.n, args.p, args.seed)?,
        GraphKind::Path => gen::path(args.n, args.weight),
        GraphKind::Cycle => gen::cycle(args.n, args.weight),
        GraphKind::Star => gen::star(args.n, args.weight),
        GraphKind::Grid => {
            let (rows, cols) = match (args.rows, args.cols) {
                (Some(r), Some(c)) => (r, c),
                (None, None) => {
                    let side = (args.n as f64).sqrt().round() as usize;
                    (side, side)
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "grid needs both --rows and --cols (or neither)".into(),
                    ))
                }
            };
            gen::grid(rows, cols, args.weight)
        }
        GraphKind::Barbell => gen::barbell(args.n, args.weight)?,
    };
    io::write_graph_path(&g, &args.output)?;
    Ok(0)
}

fn check_cap(n: usize, cap: usize, what: &str) -> Result<(), Error> {
    if n > cap {
        return Err(Error::OracleCap(format!(
            "{} needs dense O(n^3) work at n = {}, cap is {} (raise --oracle-cap to override)",
            what, n, cap
        )));
    }
    Ok(())
}

fn write_report<T: serde::Serialize>(path: &Option<PathBuf>, report: &T) -> Result<(), Error> {
    if let Some(path) = path {
        let json = serde_json::to_string_pretty(report)
            .map_err(|e| Error::InvalidArgument(format!("report serialization failed: {}", e)))?;
        std::fs::write(path, json + "\n")?;
    }
    Ok(())
}

fn measure_kappa(g: &Graph, h: &Graph, cap: usize) -> Option<f64> {
    if g.n() <= cap {
        sparsifier_kappa(g, h).ok()
    } else {
        None
    }
}

fn cmd_sparsify(args: SparsifyArgs) -> Result<u8, Error> {
    let g = io::read_graph_path(&args.input)?;
    let cfg = SamplerConfig::new(args.epsilon, args.seed);
    cfg.validate()?;
    let (h, mut report): (Graph, SparsifyReport) = match args.mode {
        SparsifyMode::Exact => {
            check_cap(g.n(), args.oracle_cap, "exact leverage scores")?;
            let bounds = leverage_scores(&g);
            ideal_sample(&g, &bounds, &cfg)?
        }
        SparsifyMode::Chain => {
            let (h, _, report) = chain_sparsify(&g, &cfg)?;
            (h, report)
        }
    };
    report.kappa_measured = measure_kappa(&g, &h, args.oracle_cap.min(DEFAULT_ORACLE_CAP));
    io::write_graph_path(&h, &args.output)?;
    write_report(&args.report, &report)?;
    Ok(0)
}

fn cmd_walk_sparsify(args: WalkSparsifyArgs) -> Result<u8, Error> {
    let g = io::read_graph_path(&args.input)?;
    if args.k < 1 {
        return Err(Error::InvalidArgument("--k must be >= 1".into()));
    }
    if matches!(args.estimator, EstimatorArg::Exact) {
        check_cap(g.n(), args.oracle_cap, "exact resistance estimator")?;
    }
    let cfg = SamplerConfig::new(args.epsilon, args.seed);
    let (h, report) = sparsify_gk(&g, args.k, &cfg, args.estimator.into())?;
    io::write_graph_path(&h, &args.output)?;
    write_report(&args.report, &report)?;
    Ok(0)
}

#[derive(serde::Serialize)]
struct VerifyReport {
    n: usize,
    k: Option<usize>,
    epsilon: f64,
    kappa: f64,
    kappa_target: f64,
    verified: bool,
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Error> {
    let a = io::read_graph_path(&args.graph_a)?;
    let b = io::read_graph_path(&args.graph_b)?;
    if !(args.epsilon > 0.0 && args.epsilon < 1.0) {
        return Err(Error::InvalidArgument("epsilon must be in (0, 1)".into()));
    }
    check_cap(a.n().max(b.n()), args.oracle_cap, "verification oracle")?;
    let reference = match args.k {
        Some(k) => a.walk_graph_dense(k)?,
        None => a,
    };
    let kappa = sparsifier_kappa(&reference, &b)?;
    let target = kappa_target(args.epsilon);
    let verified = kappa <= target;
    println!("kappa {}", kappa);
    println!("target {}", target);
    println!("verified {}", verified);
    write_report(
        &args.report,
        &VerifyReport {
            n: reference.n(),
            k: args.k,
            epsilon: args.epsilon,
            kappa,
            kappa_target: target,
            verified,
        },
    )?;
    Ok(if verified { 0 } else { 1 })
}

fn cmd_resistance(args: ResistanceArgs) -> Result<u8, Error> {
    let g = io::read_graph_path(&args.input)?;
    let bounds: ResistanceBounds = match args.estimator {
        EstimatorArg::Exact => {
            check_cap(g.n(), args.oracle_cap, "exact resistances")?;
            leverage_scores(&g)
        }
        EstimatorArg::Jl => jl_resistance_bounds(&g, args.delta, args.seed)?,
        EstimatorArg::Tree => {
            let forest = build_forest(&g, args.seed, 8);
            let r: Vec<f64> = g
                .edges()
                .iter()
                .map(|e| {
                    if e.is_loop() {
                        0.0
                    } else {
                        forest.path_resistance(e.u, e.v)
                    }
                })
                .collect();
            ResistanceBounds::new(&g, r)?
        }
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(&args.output)?);
    io::write_bounds(&g, &bounds, &mut out)?;
    use std::io::Write;
    out.flush()?;
    Ok(0)
}
