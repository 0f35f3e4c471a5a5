//! Perturbation bounds for CUR approximations of `Ã = A + E`.
//!
//! Notation: `C = A(:,J)`, `R = A(I,:)`, `U = A(I,J)`, the noisy pieces
//! `C̃ = C + E_J`, `R̃ = R + E_I`, `Ũ = U + E_IJ` with `E_I = E(I,:)`,
//! `E_J = E(:,J)`, `E_IJ = E(I,J)`, and `W_k`, `V_k` the leading `k` left and
//! right singular vectors of `A`. Norms without a subscript are the chosen
//! [`NormKind`]; `‖·‖₂` is always spectral.
//!
//! Two of the displayed bounds pair `‖C Ũ_k†‖` with `‖E_J‖` and `‖Ũ_k† R̃‖`
//! with `‖E_I‖`, the reverse of the pairing in the unconditional bound. Each
//! formula is implemented exactly as displayed; for square index sets the
//! two noise norms are of the same size.

use std::fmt::Write as _;

use crate::cur::{extract, IndexList, MiddleKind};
use crate::error::{CurError, Result};
use crate::linalg::{best_rank_approx, numerical_rank, pinv, pinv_truncated, singular_values, svd, take_block, take_cols, take_rows, Matrix};
use crate::norm::{norm, NormKind};

/// `μ` in the pseudoinverse perturbation bound.
pub fn mu_constant(kind: NormKind) -> f64 {
    match kind {
        NormKind::Spectral => (1.0 + 5f64.sqrt()) / 2.0,
        NormKind::Frobenius => 2f64.sqrt(),
        NormKind::Schatten(p) if p == 2.0 => 2f64.sqrt(),
        NormKind::Schatten(_) => 3.0,
    }
}

fn spectral(a: &Matrix) -> Result<f64> {
    norm(a, NormKind::Spectral)
}

/// Low-rank truth, noise and the sampled index sets.
#[derive(Debug, Clone)]
pub struct NoisySplit {
    pub a: Matrix,
    pub e: Matrix,
    pub row_idx: IndexList,
    pub col_idx: IndexList,
    pub k: usize,
}

/// Clean and noisy submatrices of a [`NoisySplit`].
#[derive(Debug, Clone)]
pub struct SplitPieces {
    pub c: Matrix,
    pub r: Matrix,
    pub u: Matrix,
    pub c_tilde: Matrix,
    pub r_tilde: Matrix,
    pub u_tilde: Matrix,
    pub e_i: Matrix,
    pub e_j: Matrix,
    pub e_ij: Matrix,
}

impl NoisySplit {
    pub fn new(a: Matrix, e: Matrix, row_idx: IndexList, col_idx: IndexList, k: usize) -> Result<Self> {
        if a.shape() != e.shape() {
            return Err(CurError::shape(format!("noise is {:?} but matrix is {:?}", e.shape(), a.shape())));
        }
        if k == 0 {
            return Err(CurError::domain("target rank must be >= 1"));
        }
        // Validates the index lists against the shape.
        extract(&a, &row_idx, &col_idx, MiddleKind::PinvU)?;
        Ok(NoisySplit {
            a,
            e,
            row_idx,
            col_idx,
            k,
        })
    }

    pub fn a_tilde(&self) -> Matrix {
        &self.a + &self.e
    }

    pub fn pieces(&self) -> SplitPieces {
        let (i, j) = (self.row_idx.indices(), self.col_idx.indices());
        let c = take_cols(&self.a, j);
        let r = take_rows(&self.a, i);
        let u = take_block(&self.a, i, j);
        let e_j = take_cols(&self.e, j);
        let e_i = take_rows(&self.e, i);
        let e_ij = take_block(&self.e, i, j);
        SplitPieces {
            c_tilde: &c + &e_j,
            r_tilde: &r + &e_i,
            u_tilde: &u + &e_ij,
            c,
            r,
            u,
            e_i,
            e_j,
            e_ij,
        }
    }
}

/// An evaluated bound next to the quantity it bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub true_error: f64,
    /// Sum of `terms`.
    pub bound_value: f64,
    pub hypothesis_ok: bool,
    pub terms: Vec<(String, f64)>,
    pub norm: NormKind,
    pub mu: f64,
    /// Lower bound on `true_error` in the spectral norm, when one applies.
    pub lower_bound: Option<f64>,
}

impl BoundReport {
    fn from_terms(true_error: f64, hypothesis_ok: bool, terms: Vec<(&str, f64)>, norm: NormKind) -> Self {
        BoundReport {
            true_error,
            bound_value: terms.iter().map(|(_, v)| v).sum(),
            hypothesis_ok,
            terms: terms.into_iter().map(|(n, v)| (n.to_string(), v)).collect(),
            norm,
            mu: mu_constant(norm),
            lower_bound: None,
        }
    }

    /// `bound_value / true_error`, or `None` when the true error vanishes.
    pub fn ratio(&self) -> Option<f64> {
        (self.true_error > 0.0).then(|| self.bound_value / self.true_error)
    }

    /// True when the bound dominates the measured error up to `slack`.
    pub fn holds(&self, slack: f64) -> bool {
        self.bound_value >= self.true_error - slack
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from("trial,norm,mu,hypothesis_ok,true_error,bound_value");
        for (name, _) in &self.terms {
            h.push(',');
            h.push_str(name);
        }
        h
    }

    pub fn csv_row(&self, trial: usize) -> String {
        let mut row = format!(
            "{trial},{},{:.16e},{},{:.16e},{:.16e}",
            self.norm, self.mu, self.hypothesis_ok, self.true_error, self.bound_value
        );
        for (_, v) in &self.terms {
            let _ = write!(row, ",{v:.16e}");
        }
        row
    }
}

/// `‖B† − B̃†‖` against the pseudoinverse perturbation bound.
///
/// With `rank(B̃) = rank(B)` the bound is `μ‖B̃†‖₂‖B†‖₂‖E‖`; otherwise it is
/// `μ·max(‖B̃†‖₂², ‖B†‖₂²)·‖E‖` and `1/‖E‖₂` is reported as a lower bound on
/// the spectral error.
pub fn stewart_bound(b: &Matrix, e: &Matrix, kind: NormKind) -> Result<BoundReport> {
    if b.shape() != e.shape() {
        return Err(CurError::shape(format!("noise is {:?} but matrix is {:?}", e.shape(), b.shape())));
    }
    let bt = b + e;
    let b_p = pinv(b, None)?;
    let bt_p = pinv(&bt, None)?;
    let true_error = norm(&(&b_p - &bt_p), kind)?;
    let mu = mu_constant(kind);
    let e_norm = norm(e, kind)?;
    let (p2, pt2) = (spectral(&b_p)?, spectral(&bt_p)?);
    let same_rank = numerical_rank(b, None)? == numerical_rank(&bt, None)?;
    if same_rank {
        Ok(BoundReport::from_terms(true_error, true, vec![("stewart", mu * pt2 * p2 * e_norm)], kind))
    } else {
        let mut report =
            BoundReport::from_terms(true_error, true, vec![("stewart_rank_change", mu * p2.max(pt2).powi(2) * e_norm)], kind);
        let e2 = spectral(e)?;
        report.lower_bound = Some(if e2 > 0.0 { 1.0 / e2 } else { f64::INFINITY });
        Ok(report)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinvBracket {
    pub lower: f64,
    pub upper: f64,
    /// `‖(B + E)†‖`
    pub actual: f64,
}

impl PinvBracket {
    pub fn contains_actual(&self, slack: f64) -> bool {
        self.lower <= self.actual * (1.0 + slack) && self.actual <= self.upper * (1.0 + slack)
    }
}

/// `‖B†‖/(1 ± μ‖B†‖₂‖E‖)`, a bracket on `‖(B + E)†‖`.
///
/// Requires `σ_k(B) > μ‖E‖` for `k = rank(B)` and `rank(B + E) = rank(B)`.
pub fn pinv_norm_bracket(b: &Matrix, e: &Matrix, kind: NormKind) -> Result<PinvBracket> {
    if b.shape() != e.shape() {
        return Err(CurError::shape(format!("noise is {:?} but matrix is {:?}", e.shape(), b.shape())));
    }
    let bt = b + e;
    let s = singular_values(b)?;
    let k = numerical_rank(b, None)?;
    let mu = mu_constant(kind);
    let e_norm = norm(e, kind)?;
    let sigma_k = if k == 0 { 0.0 } else { s[k - 1] };
    if !(sigma_k > mu * e_norm) {
        return Err(CurError::hypothesis(format!("σ_k(B) = {sigma_k:e} does not exceed μ‖E‖ = {:e}", mu * e_norm)));
    }
    let kt = numerical_rank(&bt, None)?;
    if kt != k {
        return Err(CurError::hypothesis(format!("rank(B + E) = {kt} differs from rank(B) = {k}")));
    }
    let b_p = pinv(b, None)?;
    let p = norm(&b_p, kind)?;
    let x = mu * spectral(&b_p)? * e_norm;
    Ok(PinvBracket {
        lower: p / (1.0 + x),
        upper: p / (1.0 - x),
        actual: norm(&pinv(&bt, None)?, kind)?,
    })
}

fn require_rank(a: &Matrix, u: &Matrix, k: usize) -> Result<()> {
    let rank_a = numerical_rank(a, None)?;
    let rank_u = numerical_rank(u, None)?;
    if rank_a != k || rank_u != k {
        return Err(CurError::hypothesis(format!(
            "need rank(A) = rank(U) = {k}, got rank(A) = {rank_a}, rank(U) = {rank_u}"
        )));
    }
    Ok(())
}

/// `‖C U†‖`, `‖W_{k,I}†‖`, `‖U† R‖`, `‖V_{k,J}†‖`: each product norm next to
/// the singular-vector quantity it equals when `rank(U) = rank(A) = k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormTerms {
    pub cu: f64,
    pub w_pinv: f64,
    pub ur: f64,
    pub v_pinv: f64,
}

/// `(‖W_{k,I}†‖, ‖V_{k,J}†‖)` from the truncated SVD of `a`.
fn singular_vector_terms(a: &Matrix, rows: &[usize], cols: &[usize], k: usize, kind: NormKind) -> Result<(f64, f64)> {
    let f = svd(a, Some(k))?;
    let w = take_rows(&f.left, rows);
    let v = take_rows(&f.right, cols);
    Ok((norm(&pinv(&w, None)?, kind)?, norm(&pinv(&v, None)?, kind)?))
}

pub fn norm_terms(a: &Matrix, rows: &IndexList, cols: &IndexList, k: usize, kind: NormKind) -> Result<NormTerms> {
    let f = extract(a, rows, cols, MiddleKind::PinvU)?;
    require_rank(a, &f.u, k)?;
    let u_p = pinv(&f.u, None)?;
    let (w_pinv, v_pinv) = singular_vector_terms(a, rows.indices(), cols.indices(), k, kind)?;
    Ok(NormTerms {
        cu: norm(&(&f.c * &u_p), kind)?,
        w_pinv,
        ur: norm(&(&u_p * &f.r), kind)?,
        v_pinv,
    })
}

/// Bound on `‖A − C̃Ũ†R̃‖` with the full noisy middle matrix.
///
/// Its derivation uses `C = C U† U` and `R = U U† R`, which hold exactly when
/// `rank(U) = rank(C) = rank(R)`; that condition is reported as
/// `hypothesis_ok`. Without it the bound can fail by an arbitrary factor.
pub fn bound_prop_perturbation(s: &NoisySplit, kind: NormKind) -> Result<BoundReport> {
    let p = s.pieces();
    let n = |m: &Matrix| norm(m, kind);
    let u_p = pinv(&p.u, None)?;
    let ut_p = pinv(&p.u_tilde, None)?;
    let approx = &p.c_tilde * &ut_p * &p.r_tilde;
    let true_error = n(&(&s.a - approx))?;
    let clean = n(&(&s.a - &p.c * &u_p * &p.r))?;
    let e_ij = n(&p.e_ij)?;
    let terms = vec![
        ("cur_residual", clean),
        ("c_utp_ei", n(&(&p.c * &ut_p))? * n(&p.e_i)?),
        ("utp_rt_ej", n(&(&ut_p * &p.r_tilde))? * n(&p.e_j)?),
        ("coupling", n(&(&p.c * &u_p))? * n(&(&u_p * &p.r))? * e_ij * (3.0 + n(&ut_p)? * e_ij)),
    ];
    let rank_u = numerical_rank(&p.u, None)?;
    let hypothesis_ok = rank_u == numerical_rank(&p.c, None)? && rank_u == numerical_rank(&p.r, None)?;
    Ok(BoundReport::from_terms(true_error, hypothesis_ok, terms, kind))
}

fn truncated_pieces(s: &NoisySplit, p: &SplitPieces) -> Result<(Matrix, Matrix)> {
    let k = s.k.min(p.u_tilde.nrows().min(p.u_tilde.ncols()));
    Ok((pinv_truncated(&p.u_tilde, k, None)?, best_rank_approx(&p.u_tilde, k)?))
}

/// Error of the rank-`k` enforced approximation `C̃ Ũ_k† R̃`.
pub fn rank_enforced_error(s: &NoisySplit, kind: NormKind) -> Result<f64> {
    let p = s.pieces();
    let (utk_p, _) = truncated_pieces(s, &p)?;
    norm(&(&s.a - &p.c_tilde * utk_p * &p.r_tilde), kind)
}

/// Bound on `‖A − C̃Ũ_k†R̃‖` in terms of `U − Ũ_k`; requires
/// `rank(A) = rank(U) = k`.
pub fn bound_prop_pb(s: &NoisySplit, kind: NormKind) -> Result<BoundReport> {
    let p = s.pieces();
    require_rank(&s.a, &p.u, s.k)?;
    let n = |m: &Matrix| norm(m, kind);
    let u_p = pinv(&p.u, None)?;
    let (utk_p, utk) = truncated_pieces(s, &p)?;
    let true_error = n(&(&s.a - &p.c_tilde * &utk_p * &p.r_tilde))?;
    let gap = n(&(&p.u - &utk))?;
    let terms = vec![
        ("c_utkp_ej", n(&(&p.c * &utk_p))? * n(&p.e_j)?),
        ("utkp_rt_ei", n(&(&utk_p * &p.r_tilde))? * n(&p.e_i)?),
        ("coupling", n(&(&p.c * &u_p))? * n(&(&u_p * &p.r))? * (3.0 * gap + n(&utk_p)? * gap * gap)),
    ];
    Ok(BoundReport::from_terms(true_error, true, terms, kind))
}

/// The three estimates on `‖Ũ_k†‖`, `‖C Ũ_k†‖`, `‖Ũ_k† R̃‖` together with
/// the directly computed values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaTerms {
    pub upper: [f64; 3],
    pub actual: [f64; 3],
}

impl LemmaTerms {
    pub fn dominated(&self, slack: f64) -> bool {
        self.upper
            .iter()
            .zip(&self.actual)
            .all(|(u, a)| *a <= u * (1.0 + slack))
    }
}

/// Shared hypothesis of the estimates: `rank(A) = rank(U) = k` and
/// `σ_k(U) > 2μ‖E_IJ‖`.
fn require_gap(s: &NoisySplit, p: &SplitPieces, kind: NormKind) -> Result<()> {
    require_rank(&s.a, &p.u, s.k)?;
    let sigma_k = singular_values(&p.u)?[s.k - 1];
    let needed = 2.0 * mu_constant(kind) * norm(&p.e_ij, kind)?;
    if !(sigma_k > needed) {
        return Err(CurError::hypothesis(format!("σ_k(U) = {sigma_k:e} does not exceed 2μ‖E_IJ‖ = {needed:e}")));
    }
    Ok(())
}

/// `‖U†‖ / (1 − 2μ‖U†‖₂‖E_IJ‖)`
fn amplification(u_p: &Matrix, e_ij: f64, kind: NormKind) -> Result<f64> {
    Ok(norm(u_p, kind)? / (1.0 - 2.0 * mu_constant(kind) * spectral(u_p)? * e_ij))
}

pub fn bound_lemma_terms(s: &NoisySplit, kind: NormKind) -> Result<LemmaTerms> {
    let p = s.pieces();
    require_gap(s, &p, kind)?;
    let n = |m: &Matrix| norm(m, kind);
    let e_ij = n(&p.e_ij)?;
    let f = amplification(&pinv(&p.u, None)?, e_ij, kind)?;
    let (w, v) = singular_vector_terms(&s.a, s.row_idx.indices(), s.col_idx.indices(), s.k, kind)?;
    let (utk_p, _) = truncated_pieces(s, &p)?;
    Ok(LemmaTerms {
        upper: [
            f,
            f * (2.0 * e_ij * w) + w,
            f * (2.0 * e_ij * v + n(&p.e_j)?) + v,
        ],
        actual: [n(&utk_p)?, n(&(&p.c * &utk_p))?, n(&(&utk_p * &p.r_tilde))?],
    })
}

/// Closed-form bound on `‖A − C̃Ũ_k†R̃‖` from the singular vectors of `A` and
/// the noise blocks. With `refined`, the prefactor `‖U†‖/(1 − 2μ‖U†‖₂‖E_IJ‖)`
/// is replaced by `wv‖A†‖/(1 − 2μ wv‖A†‖‖E_IJ‖)`, `w = ‖W_{k,I}†‖`,
/// `v = ‖V_{k,J}†‖`, which no longer depends on `U`.
pub fn bound_thm_pb(s: &NoisySplit, kind: NormKind, refined: bool) -> Result<BoundReport> {
    let p = s.pieces();
    require_gap(s, &p, kind)?;
    let n = |m: &Matrix| norm(m, kind);
    let mu = mu_constant(kind);
    let (e_i, e_j, e_ij) = (n(&p.e_i)?, n(&p.e_j)?, n(&p.e_ij)?);
    let (w, v) = singular_vector_terms(&s.a, s.row_idx.indices(), s.col_idx.indices(), s.k, kind)?;
    let f = if refined {
        let scale = w * v * n(&pinv(&s.a, None)?)?;
        let denom = 1.0 - 2.0 * mu * scale * e_ij;
        if !(denom > 0.0) {
            return Err(CurError::hypothesis(format!(
                "2μ‖W†‖‖V†‖‖A†‖‖E_IJ‖ = {:e} is not below 1",
                1.0 - denom
            )));
        }
        scale / denom
    } else {
        amplification(&pinv(&p.u, None)?, e_ij, kind)?
    };
    let (utk_p, _) = truncated_pieces(s, &p)?;
    let true_error = n(&(&s.a - &p.c_tilde * utk_p * &p.r_tilde))?;
    let terms = vec![
        ("second_order", f * (2.0 * e_ij * (e_j * w + e_i * v + 2.0 * e_ij * w * v) + e_i * e_j)),
        ("w_ej", w * e_j),
        ("v_ei", v * e_i),
        ("six_wv_eij", 6.0 * w * v * e_ij),
    ];
    Ok(BoundReport::from_terms(true_error, true, terms, kind))
}

/// Universal bounds for maximal-volume row and column selections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxVolBounds {
    /// Bound on `‖W_{k,I}†‖₂`.
    pub t_rows: f64,
    /// Bound on `‖V_{k,J}†‖₂`.
    pub t_cols: f64,
    /// Frobenius analogue of `t_rows`.
    pub t_frob_rows: f64,
    pub t_frob_cols: f64,
    /// `t_rows · t_cols`, bounding `‖U†‖₂ / ‖A†‖₂`.
    pub u_pinv_factor: f64,
}

fn maxvol_ratio(k: usize, total: usize, chosen: usize) -> f64 {
    (k * (total - chosen)) as f64 / (chosen - k + 1) as f64
}

pub fn maxvol_bound(k: usize, m: usize, i_count: usize, n: usize, j_count: usize) -> Result<MaxVolBounds> {
    if k == 0 || i_count < k || j_count < k || i_count > m || j_count > n {
        return Err(CurError::domain(format!(
            "need 1 <= k <= |I| <= m and k <= |J| <= n, got k={k}, |I|={i_count}, m={m}, |J|={j_count}, n={n}"
        )));
    }
    let (ri, rj) = (maxvol_ratio(k, m, i_count), maxvol_ratio(k, n, j_count));
    let t_rows = (1.0 + ri).sqrt();
    let t_cols = (1.0 + rj).sqrt();
    Ok(MaxVolBounds {
        t_rows,
        t_cols,
        t_frob_rows: (k as f64 + ri).sqrt(),
        t_frob_cols: (k as f64 + rj).sqrt(),
        u_pinv_factor: t_rows * t_cols,
    })
}

/// `‖(σᵢ(B) − σᵢ(B̃))ᵢ‖` for the given norm; bounded by `‖B − B̃‖`.
pub fn singular_value_shift(b: &Matrix, b_tilde: &Matrix, kind: NormKind) -> Result<f64> {
    let (s, st) = (singular_values(b)?, singular_values(b_tilde)?);
    let diff: Vec<f64> = s.iter().zip(&st).map(|(x, y)| x - y).collect();
    Ok(kind.of_singulars(&diff))
}
