//! Dense linear algebra primitives: singular value decomposition,
//! Moore–Penrose pseudoinverses and numerical rank.
//!
//! Matrices are nalgebra column-major storage; the SVD itself is computed
//! by LAPACK.
//!
//! Every rank decision in the crate goes through [`rank_tolerance`], which
//! defaults to `max(m, n) · ε · σ₁` and can be overridden per call.

use nalgebra::DMatrix;

use crate::error::{CurError, Result};

/// Dense real matrix. All numerics in the crate are carried by this type.
pub type Matrix = DMatrix<f64>;

/// Singular value decomposition `left · diag(singulars) · rightᵀ`.
///
/// `left` is `m × r` and `right` is `n × r`, both with orthonormal columns.
/// When `truncation` is `Some(k)` only the leading `k` triplets are kept.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub left: Matrix,
    pub singulars: Vec<f64>,
    pub right: Matrix,
    pub truncation: Option<usize>,
    rows: usize,
    cols: usize,
}

impl SvdFactors {
    /// Shape of the decomposed matrix.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn reconstruct(&self) -> Matrix {
        let mut scaled = self.left.clone();
        for (j, s) in self.singulars.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*s);
        }
        scaled * self.right.transpose()
    }

    /// Numerical rank of the decomposed matrix under `tol` (or the default).
    pub fn rank(&self, tol: Option<f64>) -> usize {
        rank_from_singulars(&self.singulars, self.rows, self.cols, tol)
    }

    /// Pseudoinverse assembled from the stored triplets; singular values at
    /// or below the tolerance are treated as zero.
    pub fn pinv(&self, tol: Option<f64>) -> Matrix {
        let cutoff = self.cutoff(tol);
        let keep = self.singulars.iter().take_while(|s| **s > cutoff).count();
        let mut v = self.right.columns(0, keep).into_owned();
        for j in 0..keep {
            v.column_mut(j).scale_mut(1.0 / self.singulars[j]);
        }
        v * self.left.columns(0, keep).transpose()
    }

    fn cutoff(&self, tol: Option<f64>) -> f64 {
        tol.unwrap_or_else(|| {
            rank_tolerance(self.rows, self.cols, self.singulars.first().copied().unwrap_or(0.0))
        })
    }
}

/// Default numerical-rank cutoff `max(m, n) · ε · σ₁`.
pub fn rank_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// Counts singular values strictly above the cutoff.
pub fn rank_from_singulars(singulars: &[f64], rows: usize, cols: usize, tol: Option<f64>) -> usize {
    let sigma_max = singulars.first().copied().unwrap_or(0.0);
    let cutoff = tol.unwrap_or_else(|| rank_tolerance(rows, cols, sigma_max));
    singulars.iter().filter(|s| **s > cutoff).count()
}

pub fn ensure_finite(a: &Matrix) -> Result<()> {
    if let Some(pos) = a.iter().position(|x| !x.is_finite()) {
        let (r, c) = (pos % a.nrows(), pos / a.nrows());
        return Err(CurError::domain(format!(
            "matrix entry ({r}, {c}) is not finite"
        )));
    }
    Ok(())
}

/// Thin SVD, optionally truncated to the best rank-`k` factors.
pub fn svd(a: &Matrix, truncation: Option<usize>) -> Result<SvdFactors> {
    ensure_finite(a)?;
    let (rows, cols) = a.shape();
    let p = rows.min(cols);
    if let Some(k) = truncation {
        if k == 0 || k > p {
            return Err(CurError::domain(format!(
                "truncation rank {k} outside 1..={p} for a {rows}x{cols} matrix"
            )));
        }
    }
    if p == 0 {
        return Ok(SvdFactors {
            left: Matrix::zeros(rows, 0),
            singulars: Vec::new(),
            right: Matrix::zeros(cols, 0),
            truncation,
            rows,
            cols,
        });
    }
    let raw = crate::lapack::thin_svd(a, true)?;
    let (u, v_t) = (raw.u.expect("vectors requested"), raw.vt.expect("vectors requested"));
    let keep = truncation.unwrap_or(p);
    Ok(SvdFactors {
        left: u.columns(0, keep).into_owned(),
        singulars: raw.s[..keep].to_vec(),
        right: v_t.rows(0, keep).transpose(),
        truncation,
        rows,
        cols,
    })
}

/// Singular values only, in nonincreasing order.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    ensure_finite(a)?;
    let (rows, cols) = a.shape();
    if rows.min(cols) == 0 {
        return Ok(Vec::new());
    }
    Ok(crate::lapack::thin_svd(a, false)?.s)
}

pub fn numerical_rank(a: &Matrix, tol: Option<f64>) -> Result<usize> {
    let values = singular_values(a)?;
    Ok(rank_from_singulars(&values, a.nrows(), a.ncols(), tol))
}

/// Moore–Penrose pseudoinverse via the SVD.
pub fn pinv(a: &Matrix, tol: Option<f64>) -> Result<Matrix> {
    Ok(svd(a, None)?.pinv(tol))
}

/// Pseudoinverse of the best rank-`k` approximation of `a`.
///
/// If `a` has numerical rank below `k` the zero singular values are still
/// dropped, so the result is the pseudoinverse of the truncated matrix.
pub fn pinv_truncated(a: &Matrix, k: usize, tol: Option<f64>) -> Result<Matrix> {
    let full = svd(a, None)?;
    let k = k.min(full.singulars.len());
    let cutoff = full.cutoff(tol);
    let keep = full.singulars.iter().take(k).take_while(|s| **s > cutoff).count();
    let mut v = full.right.columns(0, keep).into_owned();
    for j in 0..keep {
        v.column_mut(j).scale_mut(1.0 / full.singulars[j]);
    }
    Ok(v * full.left.columns(0, keep).transpose())
}

/// Best rank-`k` approximation (truncated SVD reconstruction).
pub fn best_rank_approx(a: &Matrix, k: usize) -> Result<Matrix> {
    let k = k.min(a.nrows().min(a.ncols()));
    if k == 0 {
        return Ok(Matrix::zeros(a.nrows(), a.ncols()));
    }
    Ok(svd(a, Some(k))?.reconstruct())
}

/// `‖a − b‖_F / ‖a‖_F`, or the absolute difference when `a` vanishes.
pub fn relative_frobenius(a: &Matrix, b: &Matrix) -> f64 {
    let diff = (a - b).norm();
    let scale = a.norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Copies the rows of `a` listed in `rows`, in order, duplicates included.
pub fn take_rows(a: &Matrix, rows: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)])
}

/// Copies the columns of `a` listed in `cols`, in order, duplicates included.
pub fn take_cols(a: &Matrix, cols: &[usize]) -> Matrix {
    Matrix::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

pub fn take_block(a: &Matrix, rows: &[usize], cols: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}
