//! Exhaustive-search global solver.
//!
//! For a fixed support `I` the best objective is the sum of the `m` largest
//! eigenvalues of `A[I, I]`, so the global optimum is found by enumerating
//! every `k`-subset of `[0, d)`.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FspcaError, Result};
use crate::matcore::{top_eigen_sum_of_submatrix, SymMat};
use crate::solver::{check_sizes, refine_eigenvectors, SubspaceEstimate};
use crate::support::SupportIndices;

/// Default cap on `C(d, k)`.
pub const DEFAULT_SUPPORT_CAP: u128 = 200_000;

/// Relative tolerance for declaring two supports tied at the optimum.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleResult {
    pub optimal_support: SupportIndices,
    pub optimal_objective: f64,
    pub num_supports_examined: u64,
    /// All supports within `TIE_TOL` (relative) of the optimum, lexicographic order.
    pub ties: Vec<SupportIndices>,
}

impl OracleResult {
    /// The optimal estimate on `optimal_support`.
    pub fn estimate(&self, a: &SymMat, m: usize) -> Result<SubspaceEstimate> {
        refine_eigenvectors(a, &self.optimal_support, m)
    }
}

/// `C(n, k)` in exact integer arithmetic (saturating at `u128::MAX`).
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All ascending `k`-subsets of `[0, d)` in lexicographic order.
pub fn enumerate_supports(d: usize, k: usize) -> impl Iterator<Item = SupportIndices> {
    (0..d)
        .combinations(k)
        .map(move |c| SupportIndices::new(c, d).expect("combinations are ascending"))
}

pub fn brute_force(a: &SymMat, m: usize, k: usize) -> Result<OracleResult> {
    brute_force_with_cap(a, m, k, DEFAULT_SUPPORT_CAP)
}

pub fn brute_force_with_cap(a: &SymMat, m: usize, k: usize, cap: u128) -> Result<OracleResult> {
    let d = a.dim();
    check_sizes(d, m, k)?;
    let count = binomial(d, k);
    if count > cap {
        return Err(FspcaError::CombinatorialCap { d, k, count, cap });
    }
    let supports: Vec<Vec<usize>> = (0..d).combinations(k).collect();
    let objectives: Vec<f64> = supports
        .par_iter()
        .map(|idx| top_eigen_sum_of_submatrix(a, idx, m))
        .collect::<Result<_>>()?;

    // first maximum wins, i.e. the lexicographically smallest support
    let mut best = 0usize;
    for (i, &v) in objectives.iter().enumerate() {
        if v > objectives[best] {
            best = i;
        }
    }
    let opt = objectives[best];
    let tol = TIE_TOL * opt.abs().max(1.0);
    let ties = supports
        .iter()
        .zip(&objectives)
        .filter(|(_, &v)| v >= opt - tol)
        .map(|(s, _)| SupportIndices::new(s.clone(), d))
        .collect::<Result<Vec<_>>>()?;

    Ok(OracleResult {
        optimal_support: SupportIndices::new(supports[best].clone(), d)?,
        optimal_objective: opt,
        num_supports_examined: supports.len() as u64,
        ties,
    })
}
