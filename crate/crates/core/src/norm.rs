//! Unitarily invariant norms and the stable rank.

use std::fmt;
use std::str::FromStr;

use crate::error::{CurError, Result};
use crate::linalg::{singular_values, Matrix};

/// A normalized, unitarily invariant matrix norm determined by the
/// singular values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    /// Largest singular value (Schatten-∞).
    Spectral,
    /// Entrywise ℓ₂ (Schatten-2).
    Frobenius,
    /// ℓ_p norm of the singular values, `1 ≤ p < ∞`.
    Schatten(f64),
}

impl NormKind {
    pub fn schatten(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(CurError::domain(format!("Schatten parameter must be finite and >= 1, got {p}")));
        }
        Ok(NormKind::Schatten(p))
    }

    /// Evaluates the norm from a list of singular values.
    pub fn of_singulars(&self, singulars: &[f64]) -> f64 {
        match *self {
            NormKind::Spectral => singulars.iter().fold(0.0_f64, |m, s| m.max(s.abs())),
            NormKind::Frobenius => singulars.iter().map(|s| s * s).sum::<f64>().sqrt(),
            NormKind::Schatten(p) => {
                singulars.iter().map(|s| s.abs().powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }

    /// True when an SVD is needed to evaluate the norm.
    fn needs_spectrum(&self) -> bool {
        !matches!(self, NormKind::Frobenius)
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKind::Spectral => write!(f, "spectral"),
            NormKind::Frobenius => write!(f, "frobenius"),
            NormKind::Schatten(p) => write!(f, "schatten:{p}"),
        }
    }
}

impl FromStr for NormKind {
    type Err = CurError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spectral" | "2" => Ok(NormKind::Spectral),
            "frobenius" | "fro" | "f" => Ok(NormKind::Frobenius),
            other => match other.strip_prefix("schatten:") {
                Some(p) => {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| CurError::Usage(format!("bad Schatten parameter in '{s}'")))?;
                    NormKind::schatten(p)
                }
                None => Err(CurError::Usage(format!(
                    "unknown norm '{s}' (expected spectral, frobenius or schatten:<p>)"
                ))),
            },
        }
    }
}

pub fn norm(a: &Matrix, kind: NormKind) -> Result<f64> {
    if !kind.needs_spectrum() {
        return Ok(a.norm());
    }
    Ok(kind.of_singulars(&singular_values(a)?))
}

/// `‖A‖_F² / ‖A‖₂²`, which lies in `[1, rank(A)]`.
pub fn stable_rank(a: &Matrix) -> Result<f64> {
    let s = singular_values(a)?;
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Err(CurError::domain("stable rank of the zero matrix is undefined"));
    }
    let fro2: f64 = s.iter().map(|x| x * x).sum();
    Ok(fro2 / (top * top))
}

/// Two-sided bracket on `st.rank(A + E)` computed from `A` and the size of `E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableRankBounds {
    pub lower: f64,
    pub upper: f64,
}

impl StableRankBounds {
    pub fn contains(&self, value: f64, slack: f64) -> bool {
        self.lower <= value + slack && value <= self.upper + slack
    }
}

/// Perturbation bracket for the stable rank.
///
/// The upper bound is infinite once `‖E‖₂ ≥ ‖A‖₂`; the lower bound is
/// clamped to zero once `‖E‖_F ≥ ‖A‖_F`.
pub fn stable_rank_bounds(a: &Matrix, e: &Matrix) -> Result<StableRankBounds> {
    if a.shape() != e.shape() {
        return Err(CurError::shape(format!(
            "perturbation is {:?} but matrix is {:?}",
            e.shape(),
            a.shape()
        )));
    }
    let sa = singular_values(a)?;
    let a2 = sa.first().copied().unwrap_or(0.0);
    if a2 == 0.0 {
        return Err(CurError::domain("stable rank of the zero matrix is undefined"));
    }
    let af = NormKind::Frobenius.of_singulars(&sa);
    let sr = (af * af) / (a2 * a2);
    let ef = e.norm();
    let e2 = norm(e, NormKind::Spectral)?;

    let num_lo = 1.0 - ef / af;
    let lower = if num_lo > 0.0 {
        sr * (num_lo / (1.0 + e2 / af)).powi(2)
    } else {
        0.0
    };
    let den_hi = 1.0 - e2 / a2;
    let upper = if den_hi > 0.0 {
        sr * ((1.0 + ef / af) / den_hi).powi(2)
    } else {
        f64::INFINITY
    };
    Ok(StableRankBounds { lower, upper })
}
