//! CUR decompositions `A = C U† R` and CUR approximations `C (C†AR†) R`.
//!
//! `C = A(:, J)`, `R = A(I, :)` and `U = A(I, J)` are literal extractions;
//! index lists may repeat entries and repeated rows or columns are copied
//! verbatim. Whether a choice of `(I, J)` yields an exact decomposition is
//! decided by numerical rank comparisons under one rank tolerance, see
//! [`check_equivalences`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CurError, Result};
use crate::linalg::{numerical_rank, pinv, pinv_truncated, relative_frobenius, take_block, take_cols, take_rows, Matrix};

/// Ordered, zero-based indices into a dimension of size `bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexList {
    indices: Vec<usize>,
    bound: usize,
}

impl IndexList {
    pub fn new(indices: Vec<usize>, bound: usize) -> Result<Self> {
        if let Some(bad) = indices.iter().find(|&&i| i >= bound) {
            return Err(CurError::domain(format!("index {bad} out of bounds for dimension {bound}")));
        }
        Ok(IndexList { indices, bound })
    }

    /// `0, 1, …, bound − 1`.
    pub fn full(bound: usize) -> Self {
        IndexList {
            indices: (0..bound).collect(),
            bound,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Drops repeated entries, keeping first occurrences in order.
    pub fn dedup(&self) -> IndexList {
        let mut seen = vec![false; self.bound];
        let indices = self
            .indices
            .iter()
            .copied()
            .filter(|&i| !std::mem::replace(&mut seen[i], true))
            .collect();
        IndexList {
            indices,
            bound: self.bound,
        }
    }
}

/// Which middle matrix multiplies `C` and `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MiddleKind {
    /// `U†`
    PinvU,
    /// `(U_k)†` with `U_k` the best rank-`rank` approximation of `U`.
    PinvTruncatedU { rank: usize },
    /// `C† A R†`, the Frobenius-optimal middle matrix.
    OptimalCar,
}

impl fmt::Display for MiddleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MiddleKind::PinvU => write!(f, "pinv"),
            MiddleKind::PinvTruncatedU { rank } => write!(f, "truncated:{rank}"),
            MiddleKind::OptimalCar => write!(f, "optimal"),
        }
    }
}

impl FromStr for MiddleKind {
    type Err = CurError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pinv" | "pinv-u" => Ok(MiddleKind::PinvU),
            "optimal" | "car" => Ok(MiddleKind::OptimalCar),
            other => {
                let rank = other
                    .strip_prefix("truncated:")
                    .and_then(|k| k.parse::<usize>().ok())
                    .ok_or_else(|| {
                        CurError::Usage(format!("unknown middle '{s}' (expected pinv, truncated:<k> or optimal)"))
                    })?;
                if rank == 0 {
                    return Err(CurError::Usage("truncation rank must be >= 1".into()));
                }
                Ok(MiddleKind::PinvTruncatedU { rank })
            }
        }
    }
}

/// Row/column selections together with the extracted `C`, `U`, `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurFactors {
    pub row_idx: IndexList,
    pub col_idx: IndexList,
    pub c: Matrix,
    pub r: Matrix,
    pub u: Matrix,
    pub middle: MiddleKind,
}

impl CurFactors {
    /// The middle matrix selected by `self.middle`. `source` is only read
    /// for [`MiddleKind::OptimalCar`].
    pub fn middle_matrix(&self, source: Option<&Matrix>) -> Result<Matrix> {
        match self.middle {
            MiddleKind::PinvU => pinv(&self.u, None),
            MiddleKind::PinvTruncatedU { rank } => pinv_truncated(&self.u, rank, None),
            MiddleKind::OptimalCar => {
                let a = source.ok_or_else(|| {
                    CurError::Usage("the C†AR† middle matrix needs the source matrix".into())
                })?;
                optimal_middle(a, &self.c, &self.r)
            }
        }
    }
}

fn check_indices(a: &Matrix, rows: &IndexList, cols: &IndexList) -> Result<()> {
    if rows.is_empty() || cols.is_empty() {
        return Err(CurError::domain("row and column index lists must be nonempty"));
    }
    if let Some(bad) = rows.indices().iter().find(|&&i| i >= a.nrows()) {
        return Err(CurError::domain(format!("row index {bad} out of bounds for {} rows", a.nrows())));
    }
    if let Some(bad) = cols.indices().iter().find(|&&j| j >= a.ncols()) {
        return Err(CurError::domain(format!("column index {bad} out of bounds for {} columns", a.ncols())));
    }
    Ok(())
}

pub fn extract(a: &Matrix, row_idx: &IndexList, col_idx: &IndexList, middle: MiddleKind) -> Result<CurFactors> {
    check_indices(a, row_idx, col_idx)?;
    if middle == (MiddleKind::PinvTruncatedU { rank: 0 }) {
        return Err(CurError::domain("truncation rank must be >= 1"));
    }
    Ok(CurFactors {
        row_idx: row_idx.clone(),
        col_idx: col_idx.clone(),
        c: take_cols(a, col_idx.indices()),
        r: take_rows(a, row_idx.indices()),
        u: take_block(a, row_idx.indices(), col_idx.indices()),
        middle,
    })
}

/// `C · middle · R`.
pub fn reconstruct(f: &CurFactors, a_for_optimal: Option<&Matrix>) -> Result<Matrix> {
    let middle = f.middle_matrix(a_for_optimal)?;
    Ok(&f.c * middle * &f.r)
}

fn check_conformal(a: &Matrix, c: &Matrix, r: &Matrix) -> Result<()> {
    if c.nrows() != a.nrows() || r.ncols() != a.ncols() {
        return Err(CurError::shape(format!(
            "C is {:?} and R is {:?} but A is {:?}",
            c.shape(),
            r.shape(),
            a.shape()
        )));
    }
    Ok(())
}

/// `C† A R†`, the minimizer of `‖A − C Z R‖_F` over `Z`.
pub fn optimal_middle(a: &Matrix, c: &Matrix, r: &Matrix) -> Result<Matrix> {
    check_conformal(a, c, r)?;
    Ok(pinv(c, None)? * a * pinv(r, None)?)
}

/// `R A† C`. For `C`, `R` extracted from `A` this reproduces `U` for any
/// index choice.
pub fn middle_via_a(a: &Matrix, c: &Matrix, r: &Matrix) -> Result<Matrix> {
    check_conformal(a, c, r)?;
    Ok(r * pinv(a, None)? * c)
}

/// One of the residual-based conditions of [`EquivalenceReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualCheck {
    pub residual: f64,
    pub holds: bool,
}

impl ResidualCheck {
    fn new(residual: f64, tol: f64) -> Self {
        ResidualCheck {
            residual,
            holds: residual <= tol,
        }
    }
}

/// The five characterizations of an exact CUR decomposition:
///
/// 1. `rank(U) = rank(A)`
/// 2. `A = C U† R`
/// 3. `A = C C† A R† R`
/// 4. `A† = R† U C†`
/// 5. `rank(C) = rank(R) = rank(A)`
///
/// In exact arithmetic these are all true or all false together.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub rank_a: usize,
    pub rank_c: usize,
    pub rank_r: usize,
    pub rank_u: usize,
    pub holds_rank_match: bool,
    pub cur: ResidualCheck,
    pub proj: ResidualCheck,
    pub pinv_formula: ResidualCheck,
    pub holds_spans: bool,
}

impl EquivalenceReport {
    pub fn flags(&self) -> [bool; 5] {
        [
            self.holds_rank_match,
            self.cur.holds,
            self.proj.holds,
            self.pinv_formula.holds,
            self.holds_spans,
        ]
    }

    /// True when the five flags agree.
    pub fn coherent(&self) -> bool {
        let f = self.flags();
        f.iter().all(|&x| x == f[0])
    }

    pub fn all_hold(&self) -> bool {
        self.flags().iter().all(|&x| x)
    }
}

/// Evaluates all five conditions. Residuals are relative Frobenius errors
/// compared against `tol`; ranks use `rank_tol` or the default cutoff.
pub fn check_equivalences(
    a: &Matrix,
    row_idx: &IndexList,
    col_idx: &IndexList,
    tol: f64,
    rank_tol: Option<f64>,
) -> Result<EquivalenceReport> {
    let f = extract(a, row_idx, col_idx, MiddleKind::PinvU)?;
    let rank_a = numerical_rank(a, rank_tol)?;
    let rank_c = numerical_rank(&f.c, rank_tol)?;
    let rank_r = numerical_rank(&f.r, rank_tol)?;
    let rank_u = numerical_rank(&f.u, rank_tol)?;

    let a_pinv = pinv(a, rank_tol)?;
    let c_pinv = pinv(&f.c, rank_tol)?;
    let r_pinv = pinv(&f.r, rank_tol)?;
    let u_pinv = pinv(&f.u, rank_tol)?;

    let cur = &f.c * &u_pinv * &f.r;
    let proj = &f.c * (&c_pinv * a * &r_pinv) * &f.r;
    let pinv_formula = &r_pinv * &f.u * &c_pinv;

    Ok(EquivalenceReport {
        rank_a,
        rank_c,
        rank_r,
        rank_u,
        holds_rank_match: rank_u == rank_a,
        cur: ResidualCheck::new(relative_frobenius(a, &cur), tol),
        proj: ResidualCheck::new(relative_frobenius(a, &proj), tol),
        pinv_formula: ResidualCheck::new(relative_frobenius(&a_pinv, &pinv_formula), tol),
        holds_spans: rank_c == rank_a && rank_r == rank_a,
    })
}

fn require_rank_match(a: &Matrix, u: &Matrix, rank_tol: Option<f64>) -> Result<usize> {
    let rank_a = numerical_rank(a, rank_tol)?;
    let rank_u = numerical_rank(u, rank_tol)?;
    if rank_a != rank_u {
        return Err(CurError::hypothesis(format!("rank(U) = {rank_u} but rank(A) = {rank_a}")));
    }
    Ok(rank_a)
}

/// `(U†, C† A R†)`, which coincide when `rank(U) = rank(A)`.
pub fn pinv_u_formula(a: &Matrix, f: &CurFactors, rank_tol: Option<f64>) -> Result<(Matrix, Matrix)> {
    require_rank_match(a, &f.u, rank_tol)?;
    let lhs = pinv(&f.u, rank_tol)?;
    let rhs = pinv(&f.c, rank_tol)? * a * pinv(&f.r, rank_tol)?;
    Ok((lhs, rhs))
}

/// Frobenius residuals of `C†C = U†U`, `RR† = UU†`, `AA† = CC†`, `A†A = R†R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionResiduals {
    pub c_vs_u_row_space: f64,
    pub r_vs_u_col_space: f64,
    pub a_vs_c_col_space: f64,
    pub a_vs_r_row_space: f64,
}

impl ProjectionResiduals {
    pub fn max(&self) -> f64 {
        self.c_vs_u_row_space
            .max(self.r_vs_u_col_space)
            .max(self.a_vs_c_col_space)
            .max(self.a_vs_r_row_space)
    }
}

pub fn projection_identities(a: &Matrix, f: &CurFactors, rank_tol: Option<f64>) -> Result<ProjectionResiduals> {
    require_rank_match(a, &f.u, rank_tol)?;
    let a_p = pinv(a, rank_tol)?;
    let c_p = pinv(&f.c, rank_tol)?;
    let r_p = pinv(&f.r, rank_tol)?;
    let u_p = pinv(&f.u, rank_tol)?;
    Ok(ProjectionResiduals {
        c_vs_u_row_space: (&c_p * &f.c - &u_p * &f.u).norm(),
        r_vs_u_col_space: (&f.r * &r_p - &f.u * &u_p).norm(),
        a_vs_c_col_space: (a * &a_p - &f.c * &c_p).norm(),
        a_vs_r_row_space: (&a_p * a - &r_p * &f.r).norm(),
    })
}

/// One row of the cost comparison table (operation and entry counts with
/// all big-O constants set to 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostRow {
    pub method: &'static str,
    pub complexity: u128,
    pub storage: u128,
}

/// Complexity and storage for a rank-`k`, `m × n` matrix approximated from
/// `c` columns and `r` rows.
pub fn storage_complexity(m: usize, n: usize, k: usize, c: usize, r: usize) -> Result<Vec<CostRow>> {
    if k > c.min(r) || c.min(r) > m.min(n) {
        return Err(CurError::domain(format!(
            "need k <= min(c, r) <= min(m, n), got k={k}, c={c}, r={r}, m={m}, n={n}"
        )));
    }
    let (m, n, k, c, r) = (m as u128, n as u128, k as u128, c as u128, r as u128);
    Ok(vec![
        CostRow {
            method: "full_svd",
            complexity: (m * m * n).min(m * n * n),
            storage: m * m + n * n + k,
        },
        CostRow {
            method: "truncated_svd",
            complexity: m * n * k,
            storage: k * (m + n + 1),
        },
        CostRow {
            method: "cur_pinv_u",
            complexity: (c * r * r).min(c * c * r),
            storage: m * c + n * r + k * k,
        },
        CostRow {
            method: "cur_projection",
            complexity: m * c * c + n * r * r,
            storage: m * c + n * r + m * n,
        },
    ])
}
