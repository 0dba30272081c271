//! Dense reference computations shared by the integration tests. Nothing
//! here goes through the incremental factorization.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pursuit_lab::linalg::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let sd = 1.0 / (rows as f64).sqrt();
    let data = (0..rows * cols).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
    DenseMatrix::from_col_major(rows, cols, data).unwrap()
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn to_nalgebra(phi: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(phi.rows(), phi.cols(), phi.as_col_major())
}

/// Least-squares residual of `y` on the columns `support`, via SVD.
pub fn dense_residual(phi: &DenseMatrix, y: &[f64], support: &[usize]) -> Vec<f64> {
    if support.is_empty() {
        return y.to_vec();
    }
    let a = DMatrix::from_fn(phi.rows(), support.len(), |r, c| phi.get(r, support[c]));
    let b = DVector::from_column_slice(y);
    let x = a.clone().svd(true, true).solve(&b, 1e-13).unwrap();
    (b - a * x).iter().copied().collect()
}

pub fn dense_residual_norm(phi: &DenseMatrix, y: &[f64], support: &[usize]) -> f64 {
    dense_residual(phi, y, support).iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖y − Φx‖` computed entry by entry.
pub fn misfit(phi: &DenseMatrix, y: &[f64], x: &[f64]) -> f64 {
    let mut r = y.to_vec();
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            for (ri, a) in r.iter_mut().zip(phi.column(j)) {
                *ri -= a * xj;
            }
        }
    }
    norm(&r)
}

/// Columns ranked by decreasing |⟨a_j, r⟩| among those not in `support`,
/// ties to the lower index.
pub fn ranked(phi: &DenseMatrix, r: &[f64], support: &[usize]) -> Vec<usize> {
    let corr: Vec<f64> = (0..phi.cols())
        .map(|j| phi.column(j).iter().zip(r).map(|(a, b)| a * b).sum::<f64>().abs())
        .collect();
    let mut order: Vec<usize> = (0..phi.cols()).filter(|j| !support.contains(j)).collect();
    order.sort_by(|&a, &b| corr[b].total_cmp(&corr[a]).then(a.cmp(&b)));
    order
}

/// Plain OMP recomputing every projection from scratch. Stops after `k`
/// selections or once the residual drops below `tol_rel · ‖y‖`.
pub fn dense_omp(phi: &DenseMatrix, y: &[f64], k: usize, tol_rel: f64) -> Vec<usize> {
    let tol = tol_rel * norm(y);
    let mut support = Vec::new();
    let mut r = y.to_vec();
    while support.len() < k && norm(&r) >= tol {
        support.push(ranked(phi, &r, &support)[0]);
        r = dense_residual(phi, y, &support);
    }
    support
}

pub fn sorted(s: &[usize]) -> Vec<usize> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v
}

/// Random exactly `k`-sparse signal with standard normal nonzeros.
pub fn sparse_signal(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for j in rand::seq::index::sample(rng, n, k) {
        x[j] = rng.sample::<f64, _>(StandardNormal);
    }
    x
}

/// Outcome of the MMP-DF enumeration oracle.
#[derive(Debug, Clone)]
pub struct DfOutcome {
    pub support: Vec<usize>,
    pub residual_norm: f64,
    pub projections: usize,
    pub paths: usize,
    /// Residual norms of every completed path, in exploration order.
    pub completed: Vec<f64>,
}

/// All vectors in `[0, l)^d` by nondecreasing sum, then lexicographically.
pub fn choice_vectors(d: usize, l: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..d {
        all = all
            .into_iter()
            .flat_map(|v| {
                (0..l).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    all.sort_by(|a, b| a.iter().sum::<usize>().cmp(&b.iter().sum::<usize>()).then(a.cmp(b)));
    all
}

/// Depth-first multipath search written directly from its definition: every
/// choice vector regrows its path from the root with dense projections. A
/// set reached first by another lineage kills the path; paths that die do
/// not count towards `max_paths`.
pub fn df_oracle(
    phi: &DenseMatrix,
    y: &[f64],
    depth: usize,
    tol_rel: f64,
    branching: usize,
    max_paths: usize,
) -> DfOutcome {
    use std::collections::HashMap;
    let tol = tol_rel * norm(y);
    let mut first_lineage: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    let mut completed = Vec::new();
    let mut paths = 0;
    for v in choice_vectors(depth, branching) {
        let mut path: Vec<usize> = Vec::new();
        let mut r = y.to_vec();
        let mut dead = false;
        for &choice in v.iter() {
            if norm(&r) < tol {
                break;
            }
            let cand = ranked(phi, &r, &path);
            let Some(&j) = cand.get(choice) else {
                dead = true;
                break;
            };
            let mut child = path.clone();
            child.push(j);
            let key = sorted(&child);
            match first_lineage.get(&key) {
                Some(owner) if *owner != child => {
                    dead = true;
                    break;
                }
                Some(_) => {}
                None => {
                    first_lineage.insert(key, child.clone());
                }
            }
            path = child;
            r = dense_residual(phi, y, &path);
        }
        if dead {
            continue;
        }
        paths += 1;
        let rn = norm(&r);
        completed.push(rn);
        if rn < tol {
            return DfOutcome {
                support: path,
                residual_norm: rn,
                projections: first_lineage.len(),
                paths,
                completed,
            };
        }
        let key = sorted(&path);
        let better = match &best {
            None => true,
            Some((b, bk, _)) => rn < *b || (rn == *b && key < *bk),
        };
        if better {
            best = Some((rn, key, path));
        }
        if paths == max_paths {
            break;
        }
    }
    let (residual_norm, _, support) = best.expect("at least one complete path");
    DfOutcome {
        support,
        residual_norm,
        projections: first_lineage.len(),
        paths,
        completed,
    }
}

/// Residual the search should have returned, recomputed densely from its
/// projection log: the first support meeting the residual rule when
/// `first_met` is set and one exists, otherwise the smallest residual among
/// supports that satisfy the termination rule.
pub fn replay_expected(
    phi: &DenseMatrix,
    y: &[f64],
    trace: &[pursuit_lab::pursuit::TraceEntry],
    max_len: usize,
    tol_rel: f64,
    first_met: bool,
) -> Option<f64> {
    let tol = tol_rel * norm(y);
    let dense: Vec<(usize, f64)> = trace
        .iter()
        .map(|t| (t.support.len(), dense_residual_norm(phi, y, &t.support)))
        .collect();
    if first_met {
        if let Some(&(_, rn)) = dense.iter().find(|(_, rn)| *rn < tol) {
            return Some(rn);
        }
    }
    dense
        .iter()
        .filter(|(len, rn)| *rn < tol || *len >= max_len)
        .map(|&(_, rn)| rn)
        .min_by(f64::total_cmp)
}

/// Eigenvalues of a symmetric 3x3 matrix as roots of its characteristic
/// cubic: trigonometric solution, then Newton polishing.
pub fn eig3(a: [[f64; 3]; 3]) -> [f64; 3] {
    let tr = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0] + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    // λ³ − tr λ² + minors λ − det = 0, shifted by q = tr/3 to t³ + pt + r = 0
    let q = tr / 3.0;
    let p = minors - tr * tr / 3.0;
    let r = -2.0 * q * q * q + minors * q - det;
    let mut roots = if p.abs() < 1e-300 {
        [q; 3]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * r / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        [0.0, 1.0, 2.0].map(|k| q + m * (theta - k * tau).cos())
    };
    for x in roots.iter_mut() {
        for _ in 0..3 {
            let f = ((*x - tr) * *x + minors) * *x - det;
            let df = (3.0 * *x - 2.0 * tr) * *x + minors;
            if df.abs() > 1e-14 {
                *x -= f / df;
            }
        }
    }
    roots
}

pub fn gram3(phi: &DenseMatrix, t: [usize; 3]) -> [[f64; 3]; 3] {
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = phi.column(t[i]).iter().zip(phi.column(t[j])).map(|(a, b)| a * b).sum();
        }
    }
    g
}

/// Extreme eigenvalues over all 3-subsets, as (λ_min, λ_max) per subset.
pub fn subset_spectra(phi: &DenseMatrix) -> Vec<([usize; 3], f64, f64)> {
    let n = phi.cols();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let e = eig3(gram3(phi, [a, b, c]));
                let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                out.push(([a, b, c], lo, hi));
            }
        }
    }
    out
}

pub fn oracle_delta(spectra: &[([usize; 3], f64, f64)], c: f64) -> f64 {
    spectra
        .iter()
        .map(|&(_, lo, hi)| (c * c * hi - 1.0).max(1.0 - c * c * lo))
        .fold(0.0, f64::max)
}
