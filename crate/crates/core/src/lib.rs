//! Feature-sparsity-constrained PCA.
//!
//! Maximizes `Tr(W^T A W)` over `d x m` matrices with orthonormal columns and
//! at most `k` nonzero rows, for a PSD covariance `A`. The selected rows are
//! the selected features, shared by all `m` components.
//!
//! - [`solver::go`]: exact when `rank(A) <= m`.
//! - [`solver::ipu`]: monotone ascent for general `A` via a rank-`m` proxy.
//! - [`oracle::brute_force`]: exhaustive global optimum for small `C(d, k)`.
//! - [`synth`], [`metrics`], [`bench`]: synthetic schemes, measures and the
//!   seeded trial harness.

pub mod bench;
pub mod cli;
pub mod error;
pub mod matcore;
pub mod metrics;
pub mod oracle;
pub mod solver;
pub mod support;
pub mod synth;

pub use error::{FspcaError, Result};
pub use matcore::{EigPair, SymMat};
pub use solver::{
    go, go_lowrank_init, ipu, ipu_from_lowrank, ConvergedBy, SolveReport, SolverConfig,
    SubspaceEstimate,
};
pub use support::SupportIndices;
