//! Row-sparse principal subspace solvers.
//!
//! [`go`] selects the `k` largest diagonal entries of the covariance and
//! takes the leading eigenvectors of the selected principal submatrix. It is
//! globally optimal whenever `rank(A) <= m`.
//!
//! [`ipu`] handles the general case by repeatedly building the rank-`m`
//! proxy `P_t = A W_t (W_t^T A W_t)^+ W_t^T A`, reselecting the support from
//! `diag(P_t)`, and refining the eigenvectors on the selected principal
//! submatrix of `A` itself. Every step is an ascent step.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{FspcaError, Result};
use crate::matcore::{
    apply_sign_convention, best_rank_m, pinv_psd, principal_submatrix, psd_sqrt, sym_eig,
    sym_eigvals, SymMat, DEFAULT_PINV_REL_TOL,
};
use crate::support::SupportIndices;

/// A semi-orthogonal `d x m` matrix `W = S V` kept in factored form:
/// the row support `S` and the dense `k x m` orthonormal block `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceEstimate {
    support: SupportIndices,
    block: DMatrix<f64>,
}

impl SubspaceEstimate {
    /// Checks shapes and `V^T V = I` within `1e-10` (Frobenius).
    pub fn new(support: SupportIndices, block: DMatrix<f64>) -> Result<Self> {
        if block.nrows() != support.len() {
            return Err(FspcaError::InvalidInput(format!(
                "block has {} rows but support has {} indices",
                block.nrows(),
                support.len()
            )));
        }
        if block.ncols() == 0 || block.ncols() > block.nrows() {
            return Err(FspcaError::InvalidInput(format!(
                "block must be k x m with 1 <= m <= k, got {}x{}",
                block.nrows(),
                block.ncols()
            )));
        }
        let m = block.ncols();
        let gram = block.transpose() * &block - DMatrix::identity(m, m);
        if gram.norm() > 1e-10 {
            return Err(FspcaError::InvalidInput(format!(
                "block columns are not orthonormal (||V^T V - I||_F = {:e})",
                gram.norm()
            )));
        }
        Ok(Self { support, block })
    }

    pub fn support(&self) -> &SupportIndices {
        &self.support
    }

    pub fn block(&self) -> &DMatrix<f64> {
        &self.block
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn m(&self) -> usize {
        self.block.ncols()
    }

    /// Materializes `W` as a dense `d x m` matrix.
    pub fn dense(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.dim(), self.m());
        for (r, &i) in self.support.indices().iter().enumerate() {
            w.row_mut(i).copy_from(&self.block.row(r));
        }
        w
    }

    /// `W W^T`.
    pub fn projector(&self) -> DMatrix<f64> {
        let w = self.dense();
        &w * w.transpose()
    }

    /// `A W` (`d x m`), using only the selected columns of `A`.
    pub fn left_product(&self, a: &SymMat) -> DMatrix<f64> {
        let am = a.as_matrix();
        let idx = self.support.indices();
        let d = a.dim();
        let m = self.m();
        let mut out = DMatrix::zeros(d, m);
        for c in 0..m {
            for (r, &j) in idx.iter().enumerate() {
                let v = self.block[(r, c)];
                if v != 0.0 {
                    out.column_mut(c).axpy(v, &am.column(j), 1.0);
                }
            }
        }
        out
    }

    /// `W^T A W` (`m x m`).
    pub fn gram(&self, a: &SymMat) -> Result<SymMat> {
        let sub = principal_submatrix(a, &self.support)?;
        SymMat::symmetrize(self.block.transpose() * sub.as_matrix() * &self.block)
    }

    /// `Tr(W^T A W)`.
    pub fn objective(&self, a: &SymMat) -> Result<f64> {
        Ok(self.gram(a)?.trace())
    }
}

/// Parameters shared by the iterative solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub m: usize,
    pub k: usize,
    /// Ridge added to the working matrix (`A + eps I`); reported objectives use `A`.
    pub ridge_eps: f64,
    pub max_iter: usize,
    /// Relative objective gain below which iteration stops.
    pub objective_tol: f64,
    pub pinv_rel_tol: f64,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(m: usize, k: usize) -> Self {
        Self {
            m,
            k,
            ridge_eps: 0.1,
            max_iter: 100,
            objective_tol: 1e-10,
            pinv_rel_tol: DEFAULT_PINV_REL_TOL,
            seed: 0,
        }
    }

    pub fn with_ridge(mut self, eps: f64) -> Self {
        self.ridge_eps = eps;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        check_sizes(d, self.m, self.k)?;
        if !(self.ridge_eps >= 0.0 && self.ridge_eps.is_finite()) {
            return Err(FspcaError::InvalidInput("ridge_eps must be finite and >= 0".into()));
        }
        if self.max_iter == 0 {
            return Err(FspcaError::InvalidInput("max_iter must be at least 1".into()));
        }
        if self.pinv_rel_tol <= 0.0 || self.objective_tol < 0.0 {
            return Err(FspcaError::InvalidInput("tolerances must be positive".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_sizes(d: usize, m: usize, k: usize) -> Result<()> {
    if m == 0 || m > k || k > d {
        return Err(FspcaError::InvalidInput(format!(
            "need 1 <= m <= k <= d, got m = {m}, k = {k}, d = {d}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergedBy {
    SupportRepeat,
    ObjectivePlateau,
    MaxIter,
}

impl ConvergedBy {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConvergedBy::SupportRepeat => "support_repeat",
            ConvergedBy::ObjectivePlateau => "objective_plateau",
            ConvergedBy::MaxIter => "max_iter",
        }
    }
}

/// Outcome of an [`ipu`] run.
///
/// `objective_trace[0]` and `support_history[0]` describe the initial
/// estimate; entry `t` describes the iterate after step `t`. Objectives are
/// `Tr(W^T A W)` on the unridged `A`.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub estimate: SubspaceEstimate,
    pub objective_trace: Vec<f64>,
    pub support_history: Vec<SupportIndices>,
    pub iterates: Vec<SubspaceEstimate>,
    pub iterations: usize,
    pub converged_by: ConvergedBy,
}

impl SolveReport {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().unwrap()
    }

    pub fn initial_objective(&self) -> f64 {
        self.objective_trace[0]
    }
}

/// Top-`m` eigenvectors of `A[support, support]`, paired with `support`.
pub fn refine_eigenvectors(
    a: &SymMat,
    support: &SupportIndices,
    m: usize,
) -> Result<SubspaceEstimate> {
    if m == 0 || m > support.len() {
        return Err(FspcaError::InvalidInput(format!(
            "need 1 <= m <= k, got m = {m}, k = {}",
            support.len()
        )));
    }
    let sub = principal_submatrix(a, support)?;
    let eig = sym_eig(&sub, m)?;
    Ok(SubspaceEstimate {
        support: support.clone(),
        block: eig.vectors,
    })
}

/// Global solver for `rank(A) <= m`; a heuristic otherwise.
pub fn go(a: &SymMat, m: usize, k: usize) -> Result<SubspaceEstimate> {
    check_sizes(a.dim(), m, k)?;
    let support = SupportIndices::top_k(&a.diagonal(), k)?;
    refine_eigenvectors(a, &support, m)
}

/// `go` applied to the best rank-`m` approximation of `a`. The returned
/// estimate's objective should be evaluated on `a` itself.
pub fn go_lowrank_init(a: &SymMat, m: usize, k: usize) -> Result<SubspaceEstimate> {
    check_sizes(a.dim(), m, k)?;
    let am = best_rank_m(a, m)?;
    go(&am, m, k)
}

fn check_estimate(a: &SymMat, w: &SubspaceEstimate) -> Result<()> {
    if w.dim() != a.dim() {
        return Err(FspcaError::InvalidInput(format!(
            "estimate dimension {} does not match matrix dimension {}",
            w.dim(),
            a.dim()
        )));
    }
    Ok(())
}

/// `diag(P_t)` without forming `P_t`: with `B = A W` and `M = (W^T A W)^+`,
/// `diag(P_t)_i = sum_j (B M)_ij B_ij`. Costs `O(dkm + dm^2)`.
pub fn proxy_diag(a: &SymMat, w: &SubspaceEstimate, pinv_rel_tol: f64) -> Result<Vec<f64>> {
    check_estimate(a, w)?;
    let b = w.left_product(a);
    let mpinv = pinv_psd(&w.gram(a)?, pinv_rel_tol)?;
    let bm = &b * mpinv.as_matrix();
    Ok((0..a.dim())
        .map(|i| bm.row(i).dot(&b.row(i)))
        .collect())
}

/// The full proxy `P_t = A W (W^T A W)^+ W^T A`. Only needed for checks.
pub fn proxy_full(a: &SymMat, w: &SubspaceEstimate, pinv_rel_tol: f64) -> Result<SymMat> {
    check_estimate(a, w)?;
    let b = w.left_product(a);
    let mpinv = pinv_psd(&w.gram(a)?, pinv_rel_tol)?;
    SymMat::symmetrize(&b * mpinv.as_matrix() * b.transpose())
}

/// Iterative proxy update starting from `w0`.
///
/// Solves on `A + ridge_eps I`, reports objectives on `A`. Stops when the
/// newly selected support equals the previously selected one, when the
/// relative objective gain falls below `objective_tol`, or after `max_iter`
/// steps.
pub fn ipu(a: &SymMat, cfg: &SolverConfig, w0: &SubspaceEstimate) -> Result<SolveReport> {
    cfg.validate(a.dim())?;
    check_estimate(a, w0)?;
    if w0.k() != cfg.k || w0.m() != cfg.m {
        return Err(FspcaError::InvalidInput(format!(
            "initial estimate has (k, m) = ({}, {}), config wants ({}, {})",
            w0.k(),
            w0.m(),
            cfg.k,
            cfg.m
        )));
    }
    let work = if cfg.ridge_eps > 0.0 {
        a.add_ridge(cfg.ridge_eps)
    } else {
        a.clone()
    };

    let mut current = w0.clone();
    let mut objective_trace = vec![current.objective(a)?];
    let mut support_history = vec![current.support().clone()];
    let mut iterates = vec![current.clone()];
    let mut previous_selection: Option<SupportIndices> = None;
    let mut converged_by = ConvergedBy::MaxIter;
    let mut iterations = 0;

    for _ in 0..cfg.max_iter {
        iterations += 1;
        let scores = proxy_diag(&work, &current, cfg.pinv_rel_tol)?;
        let selected = SupportIndices::top_k(&scores, cfg.k)?;
        let next = refine_eigenvectors(&work, &selected, cfg.m)?;
        let obj = next.objective(a)?;
        let prev_obj = *objective_trace.last().unwrap();

        objective_trace.push(obj);
        support_history.push(selected.clone());
        iterates.push(next.clone());
        current = next;

        if previous_selection.as_ref() == Some(&selected) {
            converged_by = ConvergedBy::SupportRepeat;
            break;
        }
        if obj - prev_obj < cfg.objective_tol * obj.abs().max(1.0) {
            converged_by = ConvergedBy::ObjectivePlateau;
            break;
        }
        previous_selection = Some(selected);
    }

    Ok(SolveReport {
        estimate: current,
        objective_trace,
        support_history,
        iterates,
        iterations,
        converged_by,
    })
}

/// `ipu` started from [`go_lowrank_init`].
pub fn ipu_from_lowrank(a: &SymMat, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate(a.dim())?;
    let w0 = go_lowrank_init(a, cfg.m, cfg.k)?;
    ipu(a, cfg, &w0)
}

/// Orthonormalizes the columns of `g` by modified Gram-Schmidt, then applies
/// the eigenvector sign convention. `g` must have full column rank.
pub(crate) fn orthonormalize(mut g: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = g.ncols();
    for j in 0..n {
        for _pass in 0..2 {
            for i in 0..j {
                let proj = g.column(i).dot(&g.column(j));
                let ci = g.column(i).clone_owned();
                g.column_mut(j).axpy(-proj, &ci, 1.0);
            }
        }
        let norm = g.column(j).norm();
        if norm < 1e-12 {
            return Err(FspcaError::InvalidInput(
                "cannot orthonormalize rank-deficient block".into(),
            ));
        }
        g.column_mut(j).unscale_mut(norm);
    }
    apply_sign_convention(&mut g);
    Ok(g)
}

/// Uniformly random support with an orthonormalized Gaussian block.
pub fn random_subspace_init<R: Rng + ?Sized>(
    d: usize,
    m: usize,
    k: usize,
    rng: &mut R,
) -> Result<SubspaceEstimate> {
    check_sizes(d, m, k)?;
    let picked = sample(rng, d, k).into_vec();
    let support = SupportIndices::from_unsorted(picked, d)?;
    loop {
        let g = DMatrix::from_fn(k, m, |_, _| rng.sample::<f64, _>(StandardNormal));
        // a Gaussian block is rank-deficient with probability zero
        if let Ok(block) = orthonormalize(g) {
            return SubspaceEstimate::new(support, block);
        }
    }
}

/// MM auxiliary `g(W; W_t) = Tr(W^T A W_t (W_t^T A W_t)^+ W_t^T A W)`.
pub fn mm_auxiliary(a: &SymMat, w: &SubspaceEstimate, w_t: &SubspaceEstimate) -> Result<f64> {
    check_estimate(a, w)?;
    check_estimate(a, w_t)?;
    if w.m() != w_t.m() {
        return Err(FspcaError::InvalidInput("estimates differ in m".into()));
    }
    let bt = w_t.left_product(a); // A W_t
    let mpinv = pinv_psd(&w_t.gram(a)?, DEFAULT_PINV_REL_TOL)?;
    let c = w.dense().transpose() * bt; // W^T A W_t
    Ok((&c * mpinv.as_matrix() * c.transpose()).trace())
}

/// Eigenvalues (descending) of `Gamma = X^T W_t (W_t^T A W_t)^+ W_t^T X`
/// where `X` is the symmetric square root of `A`. `Gamma` is an orthogonal
/// projector, so every value is 0 or 1.
pub fn gram_projector_spectrum(a: &SymMat, w_t: &SubspaceEstimate) -> Result<Vec<f64>> {
    check_estimate(a, w_t)?;
    let x = psd_sqrt(a)?;
    let xtw = x.as_matrix().transpose() * w_t.dense();
    let mpinv = pinv_psd(&w_t.gram(a)?, DEFAULT_PINV_REL_TOL)?;
    let gamma = SymMat::symmetrize(&xtw * mpinv.as_matrix() * xtw.transpose())?;
    sym_eigvals(&gamma)
}
