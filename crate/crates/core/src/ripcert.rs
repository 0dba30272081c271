//! Exhaustive restricted isometry constants for desk-scale matrices and the
//! two recovery-condition bounds on δ_{K+L} for multipath pursuits.
//!
//! δ_S is the smallest δ with `(1−δ)‖v‖² ≤ ‖Φ_T v‖² ≤ (1+δ)‖v‖²` for every
//! column subset `T` of size `S`, i.e. the largest deviation of an extreme
//! eigenvalue of a Gram matrix `Φ_Tᵀ Φ_T` from one.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::linalg::{dot, DenseMatrix};

pub const DEFAULT_SUBSET_CAP: u128 = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RipError {
    #[error("subset size {size} must lie in 1..={cols}")]
    InvalidSubsetSize { size: usize, cols: usize },
    #[error("C({cols}, {size}) = {count} subsets exceeds the enumeration cap of {cap}")]
    TooManySubsets {
        cols: usize,
        size: usize,
        count: u128,
        cap: u128,
    },
    #[error("K and L must both be at least 1")]
    InvalidSparsity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RicCertificate {
    pub subset_size: usize,
    pub delta: f64,
    pub extremal_subset: Vec<usize>,
    pub matrix_digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    pub k: usize,
    pub l: usize,
    /// √L / (√K + √L)
    pub bound_loose: f64,
    /// √L / (√K + 2√L)
    pub bound_tight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecoveryBound {
    /// The looser condition inherited from the A*OMP analysis.
    Loose,
    /// The condition stated in the original multipath pursuit analysis.
    Tight,
}

/// `C(n, k)`, saturating at `u128::MAX`.
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

/// SHA-256 over the dimensions and the column-major entry bits.
pub fn matrix_digest(phi: &DenseMatrix) -> String {
    let mut h = Sha256::new();
    h.update((phi.rows() as u64).to_le_bytes());
    h.update((phi.cols() as u64).to_le_bytes());
    for v in phi.as_col_major() {
        h.update(v.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn subset_deviation(phi: &DenseMatrix, subset: &[usize]) -> f64 {
    let s = subset.len();
    let gram = DMatrix::from_fn(s, s, |i, j| dot(phi.column(subset[i]), phi.column(subset[j])));
    let eig = SymmetricEigen::new(gram).eigenvalues;
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    (max - 1.0).max(1.0 - min)
}

/// Advances `c` to the next `size`-combination of `[0, n)` in lexicographic
/// order, never touching positions before `fixed`.
fn next_combination(c: &mut [usize], n: usize, fixed: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > fixed {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for t in i + 1..k {
                c[t] = c[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Larger deviation wins; ties go to the lexicographically smaller subset.
fn better(a: (f64, Vec<usize>), b: (f64, Vec<usize>)) -> (f64, Vec<usize>) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

pub fn compute_ric(phi: &DenseMatrix, size: usize) -> Result<RicCertificate, RipError> {
    compute_ric_capped(phi, size, DEFAULT_SUBSET_CAP)
}

/// Exhaustive δ_S. Work is split by the first subset index; the result does
/// not depend on the thread schedule.
pub fn compute_ric_capped(phi: &DenseMatrix, size: usize, cap: u128) -> Result<RicCertificate, RipError> {
    let n = phi.cols();
    if size == 0 || size > n {
        return Err(RipError::InvalidSubsetSize { size, cols: n });
    }
    let count = binomial(n, size);
    if count > cap {
        return Err(RipError::TooManySubsets {
            cols: n,
            size,
            count,
            cap,
        });
    }
    let (delta, extremal_subset) = (0..=n - size)
        .into_par_iter()
        .map(|first| {
            let mut c: Vec<usize> = (first..first + size).collect();
            let mut best = (subset_deviation(phi, &c), c.clone());
            while next_combination(&mut c, n, 1) {
                best = better(best, (subset_deviation(phi, &c), c.clone()));
            }
            best
        })
        .reduce_with(better)
        .expect("at least one subset");
    Ok(RicCertificate {
        subset_size: size,
        delta: delta.max(0.0),
        extremal_subset,
        matrix_digest: matrix_digest(phi),
    })
}

pub fn recovery_bounds(k: usize, l: usize) -> Result<BoundPair, RipError> {
    if k == 0 || l == 0 {
        return Err(RipError::InvalidSparsity);
    }
    let sk = (k as f64).sqrt();
    let sl = (l as f64).sqrt();
    Ok(BoundPair {
        k,
        l,
        bound_loose: sl / (sk + sl),
        bound_tight: sl / (sk + 2.0 * sl),
    })
}

/// Whether δ_{K+L} of `phi` lies strictly below the selected bound.
pub fn check_recovery_condition(
    phi: &DenseMatrix,
    k: usize,
    l: usize,
    which: RecoveryBound,
) -> Result<(bool, RicCertificate), RipError> {
    let bounds = recovery_bounds(k, l)?;
    let cert = compute_ric(phi, k + l)?;
    let bound = match which {
        RecoveryBound::Loose => bounds.bound_loose,
        RecoveryBound::Tight => bounds.bound_tight,
    };
    Ok((cert.delta < bound, cert))
}
