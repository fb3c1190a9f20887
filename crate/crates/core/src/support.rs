use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{FspcaError, Result};

/// Row support of a row-sparse subspace: `k` distinct, ascending indices in `[0, d)`.
///
/// This stands in for the binary `d x k` row selection matrix `S`; left
/// multiplication by `S` is row gathering by these indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SupportIndices {
    indices: Vec<usize>,
    dim: usize,
}

impl SupportIndices {
    /// Validates that `indices` is strictly ascending and within range.
    pub fn new(indices: Vec<usize>, dim: usize) -> Result<Self> {
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(FspcaError::InvalidInput(format!(
                    "support indices must be strictly ascending, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(FspcaError::InvalidInput(format!(
                    "support index {last} out of range for dimension {dim}"
                )));
            }
        }
        Ok(Self { indices, dim })
    }

    /// Sorts and deduplicates-checks an arbitrary index list.
    pub fn from_unsorted(mut indices: Vec<usize>, dim: usize) -> Result<Self> {
        indices.sort_unstable();
        Self::new(indices, dim)
    }

    /// The support `[0, d)`.
    pub fn full(dim: usize) -> Self {
        Self {
            indices: (0..dim).collect(),
            dim,
        }
    }

    /// Picks the `k` largest scores (ties: lower index first) and returns them ascending.
    pub fn top_k(scores: &[f64], k: usize) -> Result<Self> {
        let d = scores.len();
        if k > d {
            return Err(FspcaError::InvalidInput(format!(
                "cannot select k = {k} indices out of d = {d}"
            )));
        }
        let mut order: Vec<usize> = (0..d).collect();
        // stable sort keeps the lower index first among equal scores
        order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
        let mut chosen = order[..k].to_vec();
        chosen.sort_unstable();
        Ok(Self { indices: chosen, dim: d })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Number of indices shared with `other`.
    pub fn intersection_count(&self, other: &SupportIndices) -> usize {
        let (mut a, mut b, mut n) = (0, 0, 0);
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    a += 1;
                    b += 1;
                }
            }
        }
        n
    }
}

impl fmt::Display for SupportIndices {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}
