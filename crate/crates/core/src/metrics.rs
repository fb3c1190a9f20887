//! Performance measures and approximation-bound constants.

use serde::{Deserialize, Serialize};

use crate::error::{FspcaError, Result};
use crate::matcore::{count_above, sym_eigvals, SymMat, RANK_REL_TOL};
use crate::solver::{check_sizes, SubspaceEstimate};
use crate::support::SupportIndices;

/// Threshold on relative error that counts as a hit.
pub const HIT_THRESHOLD: f64 = 1e-3;

/// `|est ∩ opt| / k`.
pub fn intersection_ratio(estimated: &SupportIndices, optimal: &SupportIndices) -> Result<f64> {
    if estimated.len() != optimal.len() || estimated.dim() != optimal.dim() {
        return Err(FspcaError::InvalidInput(format!(
            "supports differ in shape: k = {} vs {}, d = {} vs {}",
            estimated.len(),
            optimal.len(),
            estimated.dim(),
            optimal.dim()
        )));
    }
    if estimated.is_empty() {
        return Err(FspcaError::InvalidInput("empty support".into()));
    }
    Ok(estimated.intersection_count(optimal) as f64 / estimated.len() as f64)
}

/// Best intersection ratio against any of several tied optimal supports.
pub fn best_intersection_ratio(estimated: &SupportIndices, optima: &[SupportIndices]) -> Result<f64> {
    let mut best: Option<f64> = None;
    for opt in optima {
        let r = intersection_ratio(estimated, opt)?;
        best = Some(best.map_or(r, |b: f64| b.max(r)));
    }
    best.ok_or_else(|| FspcaError::InvalidInput("no optimal supports given".into()))
}

/// Nonnegative relative gap `(opt - obj) / opt`.
///
/// Small negative gaps are clamped to zero; a solver objective
/// above the optimum by more than `1e-8 * max(1, opt)` is reported as an
/// oracle violation.
pub fn relative_error(obj: f64, opt_obj: f64) -> Result<f64> {
    if opt_obj.is_nan() || opt_obj <= 0.0 {
        return Err(FspcaError::InvalidInput(format!(
            "optimal objective must be positive, got {opt_obj}"
        )));
    }
    if obj > opt_obj + 1e-8 * opt_obj.max(1.0) {
        return Err(FspcaError::OracleViolation {
            objective: obj,
            optimum: opt_obj,
        });
    }
    let re = (opt_obj - obj) / opt_obj;
    Ok(re.max(0.0))
}

pub fn hit_frequency(res: &[f64]) -> Result<f64> {
    hit_frequency_at(res, HIT_THRESHOLD)
}

pub fn hit_frequency_at(res: &[f64], threshold: f64) -> Result<f64> {
    if res.is_empty() {
        return Err(FspcaError::InvalidInput("no relative errors given".into()));
    }
    Ok(res.iter().filter(|&&r| r <= threshold).count() as f64 / res.len() as f64)
}

/// `Tr(W^T A W) / Tr(A_m)`; defined as 1 when `A = 0`.
pub fn normalized_explained_variance(a: &SymMat, w: &SubspaceEstimate, m: usize) -> Result<f64> {
    if m == 0 || m > a.dim() {
        return Err(FspcaError::InvalidInput(format!("invalid m = {m}")));
    }
    let vals = sym_eigvals(a)?;
    let denom: f64 = vals[..m].iter().sum();
    if denom <= 0.0 {
        return Ok(1.0);
    }
    Ok(w.objective(a)? / denom)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub g1: f64,
    pub g2: f64,
    /// `min{d G1 / k, d G2 / m}`.
    pub epsilon_bound: f64,
    /// `min{rank(A), 2m}`.
    pub r: usize,
}

/// Eigenvalue-decay constants from the spectrum of `a`.
pub fn bound_constants(a: &SymMat, m: usize, k: usize) -> Result<BoundConstants> {
    let d = a.dim();
    check_sizes(d, m, k)?;
    let vals = sym_eigvals(a)?;
    Ok(bound_constants_from_spectrum(&vals, m, k))
}

/// As [`bound_constants`], from a descending spectrum of length `d`.
pub fn bound_constants_from_spectrum(vals: &[f64], m: usize, k: usize) -> BoundConstants {
    let d = vals.len();
    let rank = count_above(vals, RANK_REL_TOL);
    let r = rank.min(2 * m);
    let head: f64 = vals[..m].iter().sum();
    let tail: f64 = if r > m { vals[m..r].iter().sum() } else { 0.0 };
    let total: f64 = vals.iter().sum();
    let g1 = if head > 0.0 { tail / head } else { 0.0 };
    let g2 = if total > 0.0 { tail / total } else { 0.0 };
    let epsilon_bound = (d as f64 * g1 / k as f64).min(d as f64 * g2 / m as f64);
    BoundConstants {
        g1,
        g2,
        epsilon_bound,
        r,
    }
}

/// `min{m^{-(t-1)}, 2^{-t}}`.
pub fn zipf_g1_bound(m: usize, t: f64) -> f64 {
    (m as f64).powf(-(t - 1.0)).min(2f64.powf(-t))
}
