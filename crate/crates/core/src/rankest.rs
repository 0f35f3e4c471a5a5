//! Rank estimation from a sampled submatrix of a noisy observation.
//!
//! With i.i.d. `N(0, σ²)` noise, a `p × q` noise block has spectral norm
//! about `σ√(pq)` at most, so singular values of the sampled `Ũ` above
//! `2σ√(pq)` are attributed to the signal.

use crate::cur::IndexList;
use crate::error::{CurError, Result};
use crate::linalg::{singular_values, take_block, Matrix};
use crate::random::RngStream;
use crate::sampling::{sample, Axis, SamplingPlan, SamplingScheme};

#[derive(Debug, Clone, PartialEq)]
pub struct RankEstimate {
    pub k_hat: usize,
    /// `1 / (2√(|I||J|)·σ)`, the cutoff on `‖Σᵢ†‖₂ = 1/σᵢ(Ũ)`.
    pub threshold: f64,
    pub sampled_rows: IndexList,
    pub sampled_cols: IndexList,
    pub singulars_of_u: Vec<f64>,
}

impl RankEstimate {
    /// `2σ√(|I||J|)`, the equivalent cutoff on the singular values.
    pub fn singular_cutoff(&self) -> f64 {
        1.0 / self.threshold
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(CurError::domain(format!("noise level must be positive and finite, got {sigma}")));
    }
    Ok(())
}

/// Number of singular values strictly above `2σ√(rows·cols)`.
///
/// The scan starts at `K = min(rows, cols)` and lowers `K` while
/// `‖Σ_K†‖₂ = 1/σ_K` fails the cutoff; with sorted singular values this is
/// the count of values clearing it, and zero when none do.
pub fn estimate_rank_from_singulars(singulars: &[f64], rows: usize, cols: usize, sigma: f64) -> Result<usize> {
    check_sigma(sigma)?;
    let cutoff = 2.0 * sigma * ((rows * cols) as f64).sqrt();
    let mut k = singulars.len().min(rows.min(cols));
    while k > 0 && !(singulars[k - 1] > cutoff) {
        k -= 1;
    }
    Ok(k)
}

/// Samples `I` and `J`, forms `Ũ = Ã(I, J)` and counts its singular values
/// above the noise cutoff.
pub fn estimate_rank(a_tilde: &Matrix, sigma: f64, row_plan: &SamplingPlan, col_plan: &SamplingPlan) -> Result<RankEstimate> {
    check_sigma(sigma)?;
    if row_plan.axis != Axis::Rows || col_plan.axis != Axis::Columns {
        return Err(CurError::Usage("row plan must sample rows and column plan columns".into()));
    }
    estimate_rank_at(a_tilde, sigma, sample(a_tilde, row_plan)?, sample(a_tilde, col_plan)?)
}

/// The estimator on fixed index lists.
pub fn estimate_rank_at(a_tilde: &Matrix, sigma: f64, rows: IndexList, cols: IndexList) -> Result<RankEstimate> {
    check_sigma(sigma)?;
    if rows.is_empty() || cols.is_empty() || rows.bound() != a_tilde.nrows() || cols.bound() != a_tilde.ncols() {
        return Err(CurError::domain("index lists must be nonempty and match the matrix shape"));
    }
    let u = take_block(a_tilde, rows.indices(), cols.indices());
    let s = singular_values(&u)?;
    let (p, q) = (rows.len(), cols.len());
    Ok(RankEstimate {
        k_hat: estimate_rank_from_singulars(&s, p, q, sigma)?,
        threshold: 1.0 / (2.0 * ((p * q) as f64).sqrt() * sigma),
        sampled_rows: rows,
        sampled_cols: cols,
        singulars_of_u: s,
    })
}

/// Length-based row and column plans drawing from independent forks of `rng`.
pub fn length_plans(rows: usize, cols: usize, rng: &RngStream) -> Result<(SamplingPlan, SamplingPlan)> {
    Ok((
        SamplingPlan::new(Axis::Rows, SamplingScheme::Length, rows, rng.fork(0))?,
        SamplingPlan::new(Axis::Columns, SamplingScheme::Length, cols, rng.fork(1))?,
    ))
}

/// Leading-order spectral norm bound `σ√(rows·cols)` for a Gaussian block.
pub fn gaussian_submatrix_norm_bound(rows: usize, cols: usize, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(CurError::domain(format!("noise level must be finite and >= 0, got {sigma}")));
    }
    Ok(sigma * ((rows * cols) as f64).sqrt())
}

/// Heuristic noise level: median singular value of `Ũ` over
/// `√max(rows, cols)`. Only meaningful when the signal rank is well below
/// half the block size; not part of the estimator itself.
pub fn estimate_sigma_heuristic(u_tilde: &Matrix) -> Result<f64> {
    let s = singular_values(u_tilde)?;
    if s.is_empty() {
        return Err(CurError::domain("empty block"));
    }
    let mid = s.len() / 2;
    let median = if s.len() % 2 == 1 { s[mid] } else { 0.5 * (s[mid - 1] + s[mid]) };
    Ok(median / (u_tilde.nrows().max(u_tilde.ncols()) as f64).sqrt())
}
