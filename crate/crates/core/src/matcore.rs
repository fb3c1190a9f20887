//! Dense symmetric linear algebra kernel.
//!
//! Everything the solvers and the oracle need: a symmetric eigensolver
//! (Householder tridiagonalization followed by implicit QL), the PSD
//! pseudoinverse, principal submatrices and best rank-`m` truncation.
//! All functions are pure and deterministic: identical input bits give
//! identical output bits.

use nalgebra::DMatrix;

use crate::error::{FspcaError, Result};
use crate::support::SupportIndices;

/// Default relative cutoff used by [`pinv_psd`].
pub const DEFAULT_PINV_REL_TOL: f64 = 1e-12;

/// Relative threshold (times `lambda_max`) below which an eigenvalue counts as zero
/// when computing numerical rank.
pub const RANK_REL_TOL: f64 = 1e-10;

/// Sweep cap per eigenvalue for the QL iteration.
const MAX_QL_ITERATIONS: usize = 60;

/// Dense symmetric `d x d` matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat(DMatrix<f64>);

impl SymMat {
    /// Validates squareness, finiteness and symmetry
    /// (`|a_ij - a_ji| <= 1e-12 * max(1, max|a|)`).
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(FspcaError::InvalidInput(format!(
                "matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(FspcaError::InvalidInput("matrix must be non-empty".into()));
        }
        let d = m.nrows();
        let mut max_abs = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let v = m[(i, j)];
                if !v.is_finite() {
                    return Err(FspcaError::NonFinite { row: i, col: j });
                }
                max_abs = max_abs.max(v.abs());
            }
        }
        let tol = 1e-12 * max_abs.max(1.0);
        for i in 0..d {
            for j in (i + 1)..d {
                if (m[(i, j)] - m[(j, i)]).abs() > tol {
                    return Err(FspcaError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    /// Averages `m` with its transpose. Used for products that are symmetric
    /// in exact arithmetic.
    pub fn symmetrize(m: DMatrix<f64>) -> Result<Self> {
        let t = m.transpose();
        Self::new((m + t) * 0.5)
    }

    pub fn from_row_slice(d: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != d * d {
            return Err(FspcaError::InvalidInput(format!(
                "expected {} entries for a {d}x{d} matrix, got {}",
                d * d,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(d, d, entries))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(DMatrix::zeros(d, d))
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        let d = values.len();
        let mut m = DMatrix::zeros(d, d);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// `A + sigma * I`.
    pub fn add_ridge(&self, sigma: f64) -> SymMat {
        let mut m = self.0.clone();
        for i in 0..self.dim() {
            m[(i, i)] += sigma;
        }
        SymMat(m)
    }

    /// Permutes rows and columns: `out[i][j] = a[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<SymMat> {
        let d = self.dim();
        if perm.len() != d {
            return Err(FspcaError::InvalidInput("permutation length mismatch".into()));
        }
        let mut seen = vec![false; d];
        for &p in perm {
            if p >= d || seen[p] {
                return Err(FspcaError::InvalidInput("not a permutation".into()));
            }
            seen[p] = true;
        }
        Ok(SymMat(DMatrix::from_fn(d, d, |i, j| self.0[(perm[i], perm[j])])))
    }
}

/// Leading eigenpairs, values sorted descending, vectors as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct EigPair {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Flips each column so that its entry of largest magnitude is nonnegative
/// (ties go to the lowest row index).
pub fn apply_sign_convention(m: &mut DMatrix<f64>) {
    for j in 0..m.ncols() {
        let mut best = 0usize;
        let mut best_abs = -1.0f64;
        for i in 0..m.nrows() {
            let v = m[(i, j)].abs();
            if v > best_abs {
                best_abs = v;
                best = i;
            }
        }
        if m[(best, j)] < 0.0 {
            for i in 0..m.nrows() {
                m[(i, j)] = -m[(i, j)];
            }
        }
    }
}

/// Householder reduction to tridiagonal form followed by implicit QL.
/// `v` is row-major `n x n`; on return `d` holds eigenvalues (unsorted) and,
/// when `vectors` is set, `v` holds the eigenvectors as columns.
fn tridiagonal_ql(v: &mut [f64], n: usize, vectors: bool) -> Result<Vec<f64>> {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 1 {
        d[0] = v[0];
        v[0] = 1.0;
        return Ok(d);
    }
    let at = |i: usize, j: usize| i * n + j;

    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    if vectors {
        for i in 0..(n - 1) {
            v[at(n - 1, i)] = v[at(i, i)];
            v[at(i, i)] = 1.0;
            let h = d[i + 1];
            if h != 0.0 {
                for k in 0..=i {
                    d[k] = v[at(k, i + 1)] / h;
                }
                for j in 0..=i {
                    let mut g = 0.0;
                    for k in 0..=i {
                        g += v[at(k, i + 1)] * v[at(k, j)];
                    }
                    for k in 0..=i {
                        v[at(k, j)] -= g * d[k];
                    }
                }
            }
            for k in 0..=i {
                v[at(k, i + 1)] = 0.0;
            }
        }
        for j in 0..n {
            d[j] = v[at(n - 1, j)];
            v[at(n - 1, j)] = 0.0;
        }
        v[at(n - 1, n - 1)] = 1.0;
    } else {
        for (i, di) in d.iter_mut().enumerate() {
            *di = v[at(i, i)];
        }
    }
    e[0] = 0.0;

    // implicit QL on the tridiagonal (d, e)
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(FspcaError::EigenNoConvergence {
                        iterations: MAX_QL_ITERATIONS,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if vectors {
                        for k in 0..n {
                            let hk = v[at(k, i + 1)];
                            v[at(k, i + 1)] = s * v[at(k, i)] + c * hk;
                            v[at(k, i)] = c * v[at(k, i)] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(d)
}

fn row_major(a: &SymMat) -> Vec<f64> {
    let n = a.dim();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            v[i * n + j] = a.0[(i, j)];
        }
    }
    v
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    order
}

/// The `p` leading eigenpairs of `a`.
pub fn sym_eig(a: &SymMat, p: usize) -> Result<EigPair> {
    let n = a.dim();
    if p == 0 || p > n {
        return Err(FspcaError::InvalidInput(format!(
            "requested {p} eigenpairs of a {n}x{n} matrix"
        )));
    }
    let mut v = row_major(a);
    let d = tridiagonal_ql(&mut v, n, true)?;
    let order = descending_order(&d);
    let values: Vec<f64> = order[..p].iter().map(|&i| d[i]).collect();
    let mut vectors = DMatrix::from_fn(n, p, |r, c| v[r * n + order[c]]);
    apply_sign_convention(&mut vectors);
    Ok(EigPair { values, vectors })
}

/// All eigenvalues of `a`, sorted descending. Skips eigenvector accumulation.
pub fn sym_eigvals(a: &SymMat) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut v = row_major(a);
    let mut d = tridiagonal_ql(&mut v, n, false)?;
    d.sort_by(|x, y| y.total_cmp(x));
    Ok(d)
}

/// Sum of the `m` largest eigenvalues of the principal submatrix `a[idx, idx]`.
/// Allocation-light path used by the brute-force oracle.
pub(crate) fn top_eigen_sum_of_submatrix(a: &SymMat, idx: &[usize], m: usize) -> Result<f64> {
    let k = idx.len();
    let mut v = vec![0.0; k * k];
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            v[r * k + c] = a.0[(i, j)];
        }
    }
    let mut d = tridiagonal_ql(&mut v, k, false)?;
    d.sort_by(|x, y| y.total_cmp(x));
    Ok(d[..m].iter().sum())
}

/// Moore-Penrose pseudoinverse of a symmetric PSD matrix. Eigenvalues at or
/// below `rel_tol * max(lambda_max, 1)` are treated as zero.
pub fn pinv_psd(b: &SymMat, rel_tol: f64) -> Result<SymMat> {
    if rel_tol <= 0.0 {
        return Err(FspcaError::InvalidInput("pinv rel_tol must be positive".into()));
    }
    let n = b.dim();
    let eig = sym_eig(b, n)?;
    let cutoff = rel_tol * eig.values[0].max(1.0);
    let mut out = DMatrix::zeros(n, n);
    for (j, &lam) in eig.values.iter().enumerate() {
        if lam > cutoff {
            let col = eig.vectors.column(j);
            out += (col * col.transpose()) / lam;
        }
    }
    SymMat::symmetrize(out)
}

/// `A[idx, idx]`.
pub fn principal_submatrix(a: &SymMat, idx: &SupportIndices) -> Result<SymMat> {
    if idx.dim() != a.dim() {
        return Err(FspcaError::InvalidInput(format!(
            "support declared for dimension {} but matrix is {}x{}",
            idx.dim(),
            a.dim(),
            a.dim()
        )));
    }
    if idx.is_empty() {
        return Err(FspcaError::InvalidInput("empty support".into()));
    }
    let ix = idx.indices();
    let k = ix.len();
    Ok(SymMat(DMatrix::from_fn(k, k, |r, c| a.0[(ix[r], ix[c])])))
}

/// Best rank-`m` approximation in Frobenius norm: `sum_{i<=m} lambda_i v_i v_i^T`.
pub fn best_rank_m(a: &SymMat, m: usize) -> Result<SymMat> {
    let eig = sym_eig(a, m)?;
    let mut out = DMatrix::zeros(a.dim(), a.dim());
    for (j, &lam) in eig.values.iter().enumerate() {
        let col = eig.vectors.column(j);
        out += (col * col.transpose()) * lam;
    }
    SymMat::symmetrize(out)
}

/// `lambda_min(a) >= -tol * max(1, lambda_max)`.
pub fn assert_psd(a: &SymMat, tol: f64) -> Result<bool> {
    let vals = sym_eigvals(a)?;
    let max = vals[0];
    let min = *vals.last().unwrap();
    Ok(min >= -tol * max.max(1.0))
}

/// Count of eigenvalues above `rel_tol * lambda_max`.
pub fn numerical_rank(a: &SymMat, rel_tol: f64) -> Result<usize> {
    let vals = sym_eigvals(a)?;
    Ok(count_above(&vals, rel_tol))
}

pub(crate) fn count_above(sorted_desc: &[f64], rel_tol: f64) -> usize {
    let max = sorted_desc[0];
    if max <= 0.0 {
        return 0;
    }
    sorted_desc.iter().filter(|&&v| v > rel_tol * max).count()
}

/// Symmetric PSD square root `X` with `X X^T = A` (negative eigenvalues clamped).
pub fn psd_sqrt(a: &SymMat) -> Result<SymMat> {
    let n = a.dim();
    let eig = sym_eig(a, n)?;
    let mut out = DMatrix::zeros(n, n);
    for (j, &lam) in eig.values.iter().enumerate() {
        if lam > 0.0 {
            let col = eig.vectors.column(j);
            out += (col * col.transpose()) * lam.sqrt();
        }
    }
    SymMat::symmetrize(out)
}
