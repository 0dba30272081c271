//! Dense kernels shared by every pursuit: column correlations and an
//! incremental QR factorization of the selected columns.
//!
//! Matrices are stored column-major so that correlating a residual with the
//! dictionary is a sequence of contiguous dot products.

use std::sync::Arc;

use thiserror::Error;

/// Relative threshold below which an orthogonalized column is considered to
/// lie in the span of the already selected columns.
pub const DEGENERATE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("non-finite entry at position {0}")]
    NonFinite(usize),
    #[error("column index {index} out of range for {cols} columns")]
    ColumnOutOfRange { index: usize, cols: usize },
    #[error("column {0} is already selected")]
    DuplicateColumn(usize),
    #[error("column {0} is numerically in the span of the selected columns")]
    DegenerateColumn(usize),
    #[error("support is empty")]
    EmptySupport,
}

/// Column-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::Empty);
        }
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite(pos));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        let mut col_major = vec![0.0; data.len()];
        for i in 0..rows {
            for j in 0..cols {
                col_major[j * rows + i] = data[i * cols + j];
            }
        }
        Self::from_col_major(rows, cols, col_major)
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, LinalgError> {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self::from_col_major(rows, cols, data)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
            .expect("identity of positive size is valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Raw column-major storage.
    pub fn as_col_major(&self) -> &[f64] {
        &self.data
    }

    /// Returns a copy with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Submatrix made of the given columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self, LinalgError> {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for &j in cols {
            if j >= self.cols {
                return Err(LinalgError::ColumnOutOfRange {
                    index: j,
                    cols: self.cols,
                });
            }
            data.extend_from_slice(self.column(j));
        }
        Self::from_col_major(self.rows, cols.len(), data)
    }

    /// `A x` for a vector of length `cols`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                actual: x.len(),
            });
        }
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.column(j), &mut out);
            }
        }
        Ok(out)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Absolute inner product of every column of `a` with `r`.
pub fn correlate(a: &DenseMatrix, r: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if r.len() != a.rows {
        return Err(LinalgError::DimensionMismatch {
            expected: a.rows,
            actual: r.len(),
        });
    }
    Ok((0..a.cols).map(|j| dot(a.column(j), r).abs()).collect())
}

/// QR factorization of a growing set of dictionary columns together with the
/// least-squares residual of the measurement vector.
///
/// Basis vectors and triangular columns are reference counted so that cloning
/// a factorization to branch a search path costs one residual copy rather
/// than a copy of the whole basis.
#[derive(Debug, Clone)]
pub struct IncrementalFactorization {
    support: Vec<usize>,
    basis: Vec<Arc<[f64]>>,
    // Column k of R holds k + 1 entries, the last one being the diagonal.
    triangular: Vec<Arc<[f64]>>,
    // Q^T y, one entry per basis vector.
    projections: Vec<f64>,
    residual: Vec<f64>,
    residual_norm: f64,
    previous_residual_norm: f64,
    y_norm: f64,
}

impl IncrementalFactorization {
    /// Empty support: the residual is `y` itself.
    pub fn new(a: &DenseMatrix, y: &[f64]) -> Result<Self, LinalgError> {
        if y.len() != a.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: a.rows,
                actual: y.len(),
            });
        }
        if let Some(pos) = y.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite(pos));
        }
        let y_norm = norm2(y);
        Ok(Self {
            support: Vec::new(),
            basis: Vec::new(),
            triangular: Vec::new(),
            projections: Vec::new(),
            residual: y.to_vec(),
            residual_norm: y_norm,
            previous_residual_norm: y_norm,
            y_norm,
        })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    /// Residual norm before the most recent append (`‖y‖` for an empty or
    /// single-column support).
    pub fn previous_residual_norm(&self) -> f64 {
        self.previous_residual_norm
    }

    /// Norm of the measurement vector the factorization was started from.
    pub fn y_norm(&self) -> f64 {
        self.y_norm
    }

    pub fn basis(&self) -> impl Iterator<Item = &[f64]> {
        self.basis.iter().map(|q| &q[..])
    }

    pub fn contains(&self, j: usize) -> bool {
        self.support.contains(&j)
    }

    /// Component of column `j` orthogonal to the current basis, with the
    /// coefficients removed along the way. Two Gram-Schmidt sweeps keep the
    /// basis orthogonal to working precision.
    fn orthogonalize(&self, a: &DenseMatrix, j: usize) -> Result<(Vec<f64>, Vec<f64>, f64), LinalgError> {
        if j >= a.cols {
            return Err(LinalgError::ColumnOutOfRange {
                index: j,
                cols: a.cols,
            });
        }
        if a.rows != self.residual.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.residual.len(),
                actual: a.rows,
            });
        }
        if self.contains(j) {
            return Err(LinalgError::DuplicateColumn(j));
        }
        let column = a.column(j);
        let column_norm = norm2(column);
        let mut v = column.to_vec();
        let mut coeffs = vec![0.0; self.basis.len()];
        for _ in 0..2 {
            for (c, q) in coeffs.iter_mut().zip(&self.basis) {
                let h = dot(q, &v);
                axpy(-h, q, &mut v);
                *c += h;
            }
        }
        let nu = norm2(&v);
        if column_norm == 0.0 || nu < DEGENERATE_REL_TOL * column_norm {
            return Err(LinalgError::DegenerateColumn(j));
        }
        Ok((v, coeffs, nu))
    }

    /// True when appending `j` would fail with a degenerate-column error.
    pub fn is_degenerate(&self, a: &DenseMatrix, j: usize) -> bool {
        matches!(self.orthogonalize(a, j), Err(LinalgError::DegenerateColumn(_)))
    }

    /// Appends column `j` and updates the residual. On error the
    /// factorization is left untouched.
    pub fn append(&mut self, a: &DenseMatrix, j: usize) -> Result<(), LinalgError> {
        let (mut v, mut coeffs, nu) = self.orthogonalize(a, j)?;
        v.iter_mut().for_each(|x| *x /= nu);
        let gamma = dot(&v, &self.residual);
        axpy(-gamma, &v, &mut self.residual);
        self.previous_residual_norm = self.residual_norm;
        // The exact update never increases the norm; rounding may.
        self.residual_norm = norm2(&self.residual).min(self.residual_norm);
        coeffs.push(nu);
        self.support.push(j);
        self.basis.push(v.into());
        self.triangular.push(coeffs.into());
        self.projections.push(gamma);
        Ok(())
    }

    /// Clone-and-append, leaving `self` untouched.
    pub fn extended(&self, a: &DenseMatrix, j: usize) -> Result<Self, LinalgError> {
        let mut next = self.clone();
        next.append(a, j)?;
        Ok(next)
    }

    /// Least-squares coefficients over the support, in append order.
    pub fn solve_coefficients(&self) -> Result<Vec<f64>, LinalgError> {
        let k = self.support.len();
        if k == 0 {
            return Err(LinalgError::EmptySupport);
        }
        let mut w = self.projections.clone();
        for i in (0..k).rev() {
            let mut acc = w[i];
            for (l, wl) in w.iter().enumerate().take(k).skip(i + 1) {
                acc -= self.triangular[l][i] * wl;
            }
            w[i] = acc / self.triangular[i][i];
        }
        Ok(w)
    }
}
