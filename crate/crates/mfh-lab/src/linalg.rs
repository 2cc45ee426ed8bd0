//! Small dense linear-algebra kernel: row-major matrices, Cholesky
//! factorization for SPD solves, and power-iteration spectral norms.
//!
//! Everything here is deliberately simple and allocation-friendly; the
//! matrices in this laboratory are at most a few thousand by a few dozen.
//! Accuracy contracts (checked against a dense eigensolver in the test
//! suite): spectral norms converge to relative tolerance 1e-10, SPD solves
//! are backward-stable Cholesky.

use crate::error::{Error, Result};

/// Relative tolerance for power-iteration eigenvalue estimates.
const POWER_TOL: f64 = 1e-10;
/// Iteration cap for power iterations; hit only by pathological spectra.
const POWER_MAX_ITERS: usize = 200_000;

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    /// All-zeros matrix.
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Build from a generator called as `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Mat {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    /// Wrap an existing row-major buffer; `data.len()` must be `rows*cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Mat {
        assert_eq!(data.len(), rows * cols, "buffer size must match dimensions");
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    /// Row `r` as a slice.
    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Mutable row `r`.
    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Underlying row-major buffer.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Transposed copy.
    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Mat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let lhs_row = self.row(r);
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, &l) in lhs_row.iter().enumerate() {
                if l == 0.0 {
                    continue;
                }
                let rhs_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &x) in out_row.iter_mut().zip(rhs_row) {
                    *o += l * x;
                }
            }
        }
        out
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "vector length must match columns");
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    /// Transposed matrix-vector product `self^T * v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "vector length must match rows");
        let mut out = vec![0.0; self.cols];
        for (r, &w) in v.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(self.row(r)) {
                *o += w * x;
            }
        }
        out
    }

    /// Gram matrix `self * self^T` (rows-by-rows).
    pub fn gram_rows(&self) -> Mat {
        let mut out = Mat::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let v = dot(self.row(i), self.row(j));
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out
    }

    /// Gram matrix `self^T * self` (columns-by-columns).
    pub fn gram_cols(&self) -> Mat {
        self.transpose().gram_rows()
    }

    /// Horizontal concatenation `[self | other]` (same row count).
    pub fn concat_cols(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows, "row counts must agree");
        let mut out = Mat::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            out.row_mut(r)[..self.cols].copy_from_slice(self.row(r));
            out.row_mut(r)[self.cols..].copy_from_slice(other.row(r));
        }
        out
    }

    /// Per-column means.
    pub fn col_means(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (o, &x) in out.iter_mut().zip(self.row(r)) {
                *o += x;
            }
        }
        let n = self.rows.max(1) as f64;
        for o in &mut out {
            *o /= n;
        }
        out
    }
}

/// Dot product of two equal-length slices.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
#[inline]
pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Infinity norm.
#[inline]
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// Cholesky factor `L` (lower triangular, `A = L L^T`) of an SPD matrix.
///
/// Fails with a numerical error when the matrix is not positive definite
/// (non-positive pivot), which is also the failure mode for rank-deficient
/// Grams.
pub fn cholesky(a: &Mat) -> Result<Mat> {
    assert_eq!(a.rows(), a.cols(), "Cholesky needs a square matrix");
    let n = a.rows();
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.at(i, j);
            for k in 0..j {
                s -= l.at(i, k) * l.at(j, k);
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(Error::numerical(
                        "cholesky",
                        format!("matrix is not positive definite (pivot {s:.3e} at index {i})"),
                    ));
                }
                l.set(i, j, s.sqrt());
            } else {
                l.set(i, j, s / l.at(j, j));
            }
        }
    }
    Ok(l)
}

/// Solve `A x = b` given the Cholesky factor `L` of `A`.
pub fn chol_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    assert_eq!(b.len(), n);
    // Forward: L y = b
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l.at(i, k) * y[k];
        }
        y[i] = s / l.at(i, i);
    }
    // Backward: L^T x = y
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l.at(k, i) * x[k];
        }
        x[i] = s / l.at(i, i);
    }
    x
}

/// Solve `A x = b` for SPD `A` via Cholesky (no explicit inversion).
pub fn solve_spd(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    Ok(chol_solve(&cholesky(a)?, b))
}

/// Deterministic start vector for power iterations: a normalized ramp,
/// which has nonzero overlap with any fixed eigenvector direction in the
/// generic case and makes every run reproducible.
fn power_start(n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 + 1.0) / (n as f64 + 1.0)).collect();
    let nv = norm2(&v);
    for x in &mut v {
        *x /= nv;
    }
    v
}

/// Largest eigenvalue of a symmetric positive semidefinite operator given
/// as a matrix-vector product, by power iteration with Rayleigh-quotient
/// convergence test at relative tolerance 1e-10.
fn power_iteration(n: usize, stage: &str, apply: impl Fn(&[f64]) -> Vec<f64>) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    let mut v = power_start(n);
    let mut lambda_prev = -1.0;
    for _ in 0..POWER_MAX_ITERS {
        let w = apply(&v);
        let lambda = dot(&v, &w);
        let wn = norm2(&w);
        if wn == 0.0 {
            // Operator annihilates the iterate: zero matrix (or unlucky
            // exact-null start, impossible for PSD Gram + generic start).
            return Ok(0.0);
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
        if (lambda - lambda_prev).abs() <= POWER_TOL * lambda.abs().max(f64::MIN_POSITIVE) {
            return Ok(lambda.max(0.0));
        }
        lambda_prev = lambda;
    }
    Err(Error::numerical(
        stage,
        format!("power iteration did not converge within {POWER_MAX_ITERS} iterations"),
    ))
}

/// Spectral norm (largest singular value) of a general matrix.
///
/// Power iteration runs on the smaller of `M^T M` and `M M^T`, applied
/// implicitly, and the result is the square root of its top eigenvalue.
pub fn spectral_norm(m: &Mat) -> Result<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0.0);
    }
    let lambda = if m.cols() <= m.rows() {
        power_iteration(m.cols(), "spectral_norm", |v| m.tr_mul_vec(&m.mul_vec(v)))?
    } else {
        power_iteration(m.rows(), "spectral_norm", |v| m.mul_vec(&m.tr_mul_vec(v)))?
    };
    Ok(lambda.sqrt())
}

/// For an SPD matrix `G`, return `(‖G‖, ‖G⁻¹‖)` — its largest eigenvalue
/// and the reciprocal of its smallest — via direct and inverse power
/// iteration (the latter through the Cholesky factor, never an explicit
/// inverse).
///
/// Fails when `G` is numerically rank-deficient: smallest eigenvalue below
/// `1e-12` times the largest, or a failed Cholesky factorization.
pub fn spd_extreme_norms(g: &Mat) -> Result<(f64, f64)> {
    assert_eq!(g.rows(), g.cols(), "Gram matrix must be square");
    let lambda_max = power_iteration(g.rows(), "estimate_lambda", |v| g.mul_vec(v))?;
    let l = cholesky(g).map_err(|e| match e {
        Error::Numerical { message, .. } => Error::numerical(
            "estimate_lambda",
            format!("rank-deficient Gram matrix: {message}"),
        ),
        other => other,
    })?;
    let inv_norm = power_iteration(g.rows(), "estimate_lambda", |v| chol_solve(&l, v))?;
    let lambda_min = 1.0 / inv_norm;
    if lambda_min < 1e-12 * lambda_max {
        return Err(Error::numerical(
            "estimate_lambda",
            format!(
                "rank-deficient Gram matrix: smallest eigenvalue {lambda_min:.3e} is below \
                 1e-12 of the largest {lambda_max:.3e}"
            ),
        ));
    }
    Ok((lambda_max, inv_norm))
}
