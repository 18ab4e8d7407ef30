//! Spectral sparsification of k-step random-walk graphs.
//!
//! The k-step walk graph `G^k` (Laplacian `D - A(D^-1 A)^(k-1)`) is dense even
//! for sparse `G`. This crate sparsifies it without ever materializing it, by
//! sampling length-k walks with probabilities derived from effective-resistance
//! upper bounds. It also ships a density-independent static sparsifier built
//! from low-stretch spanning-tree chains, and a dense oracle module that makes
//! every spectral claim checkable at desk scale.

// `!(x > 0.0)` is used intentionally throughout as a NaN-rejecting guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gen;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod resistance;
pub mod rng;
pub mod solver;
pub mod sparsify;
pub mod tree;
pub mod walk;

pub use error::Error;
pub use graph::{DenseMatrix, Graph};
pub use resistance::ResistanceBounds;
pub use sparsify::{SamplerConfig, SparsifyReport};
pub use tree::RootedTree;

/// Default vertex-count cap for dense (cubic) oracle computations.
pub const DEFAULT_ORACLE_CAP: usize = 512;
