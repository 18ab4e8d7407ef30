use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("graph is disconnected: no path between vertices {0} and {1}")]
    Disconnected(usize, usize),
    #[error("cannot eliminate isolated vertex {0} (zero degree)")]
    IsolatedElimination(usize),
    #[error("walk step ({0}, {1}) is not an edge")]
    NotAnEdge(usize, usize),
    #[error("oracle cap exceeded: {0}")]
    OracleCap(String),
    #[error("iterative solver did not converge on sketch row {row} after {iters} iterations (residual {residual:.3e})")]
    SolverDiverged {
        row: usize,
        iters: usize,
        residual: f64,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
