//! Row and column sampling distributions and i.i.d. samplers.
//!
//! Draws use inverse-CDF lookup on a cumulative vector, so a plan with a
//! fixed stream always yields the same index list.

use std::fmt;
use std::str::FromStr;

use crate::cur::{extract, CurFactors, IndexList, MiddleKind};
use crate::error::{CurError, Result};
use crate::linalg::{numerical_rank, rank_from_singulars, svd, Matrix};
use crate::norm::{norm, NormKind};
use crate::random::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Columns,
}

impl Axis {
    fn len(self, a: &Matrix) -> usize {
        match self {
            Axis::Rows => a.nrows(),
            Axis::Columns => a.ncols(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SamplingScheme {
    /// `1/n` for every index.
    Uniform,
    /// Squared row or column norms over `‖A‖_F²`.
    Length,
    /// Squared row norms of the leading `k` singular vectors, divided by `k`.
    Leverage { k: usize },
    /// Caller-supplied probabilities.
    Custom(Vec<f64>),
}

impl fmt::Display for SamplingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplingScheme::Uniform => write!(f, "uniform"),
            SamplingScheme::Length => write!(f, "length"),
            SamplingScheme::Leverage { k } => write!(f, "leverage:{k}"),
            SamplingScheme::Custom(_) => write!(f, "custom"),
        }
    }
}

impl FromStr for SamplingScheme {
    type Err = CurError;

    /// Parses `uniform`, `length` and `leverage:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(SamplingScheme::Uniform),
            "length" => Ok(SamplingScheme::Length),
            other => other
                .strip_prefix("leverage:")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|k| *k >= 1)
                .map(|k| SamplingScheme::Leverage { k })
                .ok_or_else(|| {
                    CurError::Usage(format!("unknown scheme '{s}' (expected uniform, length or leverage:<k>)"))
                }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SamplingPlan {
    pub axis: Axis,
    pub scheme: SamplingScheme,
    pub count: usize,
    pub rng: RngStream,
    pub dedup: bool,
}

impl SamplingPlan {
    pub fn new(axis: Axis, scheme: SamplingScheme, count: usize, rng: RngStream) -> Result<Self> {
        if count == 0 {
            return Err(CurError::domain("sample count must be >= 1"));
        }
        Ok(SamplingPlan {
            axis,
            scheme,
            count,
            rng,
            dedup: false,
        })
    }

    pub fn with_dedup(mut self, dedup: bool) -> Self {
        self.dedup = dedup;
        self
    }
}

const SUM_TOLERANCE: f64 = 1e-12;

fn normalized(weights: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(CurError::domain(format!("{what} distribution is identically zero")));
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Checks that `p` is a probability vector of length `len`.
pub fn validate_probabilities(p: &[f64], len: usize) -> Result<()> {
    if p.len() != len {
        return Err(CurError::shape(format!("probability vector has length {}, expected {len}", p.len())));
    }
    if let Some((i, x)) = p.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x >= 0.0)) {
        return Err(CurError::domain(format!("probability {i} is {x}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(CurError::domain(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

pub fn distribution(a: &Matrix, axis: Axis, scheme: &SamplingScheme) -> Result<Vec<f64>> {
    let len = axis.len(a);
    match scheme {
        SamplingScheme::Uniform => {
            if len == 0 {
                return Err(CurError::domain("cannot sample from an empty dimension"));
            }
            Ok(vec![1.0 / len as f64; len])
        }
        SamplingScheme::Length => {
            let weights: Vec<f64> = match axis {
                Axis::Rows => a.row_iter().map(|r| r.norm_squared()).collect(),
                Axis::Columns => a.column_iter().map(|c| c.norm_squared()).collect(),
            };
            normalized(weights, "length")
        }
        SamplingScheme::Leverage { k } => {
            let k = *k;
            let f = svd(a, None)?;
            let rank = rank_from_singulars(&f.singulars, a.nrows(), a.ncols(), None);
            if k == 0 || k > rank {
                return Err(CurError::domain(format!("leverage rank {k} outside 1..={rank}")));
            }
            let vectors = match axis {
                Axis::Rows => f.left.columns(0, k).into_owned(),
                Axis::Columns => f.right.columns(0, k).into_owned(),
            };
            // Row norms sum to k up to rounding; dividing by the actual sum
            // keeps the total within the probability tolerance.
            let weights: Vec<f64> = vectors.row_iter().map(|r| r.norm_squared()).collect();
            normalized(weights, "leverage")
        }
        SamplingScheme::Custom(p) => {
            validate_probabilities(p, len)?;
            Ok(p.clone())
        }
    }
}

/// `weight · p + (1 − weight) · q`.
pub fn mix(p: &[f64], q: &[f64], weight: f64) -> Result<Vec<f64>> {
    if p.len() != q.len() {
        return Err(CurError::shape("mixed distributions differ in length"));
    }
    if !(0.0..=1.0).contains(&weight) {
        return Err(CurError::domain(format!("mixture weight {weight} outside [0, 1]")));
    }
    normalized(
        p.iter().zip(q).map(|(x, y)| weight * x + (1.0 - weight) * y).collect(),
        "mixture",
    )
}

/// `count` i.i.d. draws from `probs`, advancing `rng`.
pub fn draw_indices(probs: &[f64], count: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cumulative.push(acc);
    }
    let last_positive = probs
        .iter()
        .rposition(|p| *p > 0.0)
        .ok_or_else(|| CurError::domain("distribution is identically zero"))?;
    Ok((0..count)
        .map(|_| {
            let x = rng.uniform() * acc;
            cumulative.partition_point(|c| *c <= x).min(last_positive)
        })
        .collect())
}

/// Samples along `plan.axis`. The plan's stream is cloned, so repeated calls
/// with the same plan return the same list.
pub fn sample(a: &Matrix, plan: &SamplingPlan) -> Result<IndexList> {
    let probs = distribution(a, plan.axis, &plan.scheme)?;
    let mut rng = plan.rng.clone();
    let list = IndexList::new(draw_indices(&probs, plan.count, &mut rng)?, probs.len())?;
    Ok(if plan.dedup { list.dedup() } else { list })
}

/// `‖AᵀA − R̂ᵀR̂‖₂` where `R̂` stacks `A(i,:)/√(d·pᵢ)` over the sampled rows.
pub fn gram_deviation(a: &Matrix, row_idx: &IndexList, probs: &[f64]) -> Result<f64> {
    if probs.len() != a.nrows() {
        return Err(CurError::shape(format!(
            "{} probabilities for {} rows",
            probs.len(),
            a.nrows()
        )));
    }
    let d = row_idx.len() as f64;
    let mut r_hat = Matrix::zeros(row_idx.len(), a.ncols());
    for (t, &i) in row_idx.indices().iter().enumerate() {
        if i >= a.nrows() {
            return Err(CurError::domain(format!("row index {i} out of bounds for {} rows", a.nrows())));
        }
        if !(probs[i] > 0.0) {
            return Err(CurError::domain(format!("sampled row {i} has probability {}", probs[i])));
        }
        let scale = 1.0 / (d * probs[i]).sqrt();
        r_hat.row_mut(t).copy_from(&(a.row(i) * scale));
    }
    let gap = a.transpose() * a - r_hat.transpose() * &r_hat;
    norm(&gap, NormKind::Spectral)
}

#[derive(Debug, Clone)]
pub struct SampledCur {
    pub factors: CurFactors,
    /// `rank(U) = rank(A)` under the rank tolerance.
    pub success: bool,
    pub rank_a: usize,
    pub rank_u: usize,
}

/// Samples rows and columns independently and extracts the CUR factors.
pub fn sample_cur(
    a: &Matrix,
    row_plan: &SamplingPlan,
    col_plan: &SamplingPlan,
    middle: MiddleKind,
    rank_tol: Option<f64>,
) -> Result<SampledCur> {
    if row_plan.axis != Axis::Rows || col_plan.axis != Axis::Columns {
        return Err(CurError::Usage("row plan must sample rows and column plan columns".into()));
    }
    let rows = sample(a, row_plan)?;
    let cols = sample(a, col_plan)?;
    let factors = extract(a, &rows, &cols, middle)?;
    let rank_a = numerical_rank(a, rank_tol)?;
    let rank_u = numerical_rank(&factors.u, rank_tol)?;
    Ok(SampledCur {
        factors,
        success: rank_u == rank_a,
        rank_a,
        rank_u,
    })
}

/// `max(⌈multiplier · k · ln k⌉, k + 2)`.
pub fn oversampled_count(k: usize, multiplier: f64) -> usize {
    let kf = k as f64;
    let scaled = (multiplier * kf * kf.ln()).ceil();
    let scaled = if scaled.is_finite() && scaled > 0.0 { scaled as usize } else { 0 };
    scaled.max(k + 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn plan(axis: Axis, scheme: SamplingScheme, count: usize, seed: u64) -> SamplingPlan {
        SamplingPlan::new(axis, scheme, count, RngStream::new(seed, 0)).unwrap()
    }

    #[test]
    fn length_distribution() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 2f64.sqrt()]);
        let p = distribution(&a, Axis::Rows, &SamplingScheme::Length).unwrap();
        assert_relative_eq!(p[0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(p[1], 0.75, epsilon = 1e-15);
    }

    #[test]
    fn uniform_distribution() {
        let a = Matrix::zeros(3, 4);
        let p = distribution(&a, Axis::Columns, &SamplingScheme::Uniform).unwrap();
        assert_eq!(p, vec![0.25; 4]);
    }

    #[test]
    fn leverage_distribution() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 0.0]);
        let p = distribution(&a, Axis::Columns, &SamplingScheme::Leverage { k: 1 }).unwrap();
        assert_relative_eq!(p[0], 1.0, epsilon = 1e-14);
        assert!(p[1].abs() < 1e-14);
        assert!(distribution(&a, Axis::Columns, &SamplingScheme::Leverage { k: 2 }).is_err());
    }

    #[test]
    fn zero_matrix_rejected() {
        let z = Matrix::zeros(3, 3);
        assert!(matches!(distribution(&z, Axis::Rows, &SamplingScheme::Length), Err(CurError::Domain(_))));
        assert!(distribution(&z, Axis::Rows, &SamplingScheme::Leverage { k: 1 }).is_err());
    }

    #[test]
    fn custom_validation() {
        let a = Matrix::zeros(3, 3);
        assert!(distribution(&a, Axis::Rows, &SamplingScheme::Custom(vec![0.5, 0.5])).is_err());
        assert!(distribution(&a, Axis::Rows, &SamplingScheme::Custom(vec![0.5, 0.6, -0.1])).is_err());
        assert!(distribution(&a, Axis::Rows, &SamplingScheme::Custom(vec![0.5, 0.4, 0.0])).is_err());
    }

    #[test]
    fn point_mass_sampling() {
        let a = Matrix::zeros(3, 2);
        let p = plan(Axis::Rows, SamplingScheme::Custom(vec![1.0, 0.0, 0.0]), 3, 1);
        assert_eq!(sample(&a, &p).unwrap().indices(), &[0, 0, 0]);
        let p = plan(Axis::Rows, SamplingScheme::Custom(vec![0.0, 0.0, 1.0]), 4, 1);
        assert_eq!(sample(&a, &p).unwrap().indices(), &[2, 2, 2, 2]);
    }

    #[test]
    fn uniform_frequencies() {
        let a = Matrix::zeros(2, 4);
        let p = plan(Axis::Columns, SamplingScheme::Uniform, 10_000, 42);
        let idx = sample(&a, &p).unwrap();
        for j in 0..4 {
            let freq = idx.indices().iter().filter(|&&x| x == j).count() as f64 / 10_000.0;
            assert!((0.22..=0.28).contains(&freq), "index {j} frequency {freq}");
        }
    }

    #[test]
    fn zero_rows_never_drawn_by_length() {
        let a = Matrix::from_row_slice(3, 1, &[0.0, 1.0, 0.0]);
        let p = plan(Axis::Rows, SamplingScheme::Length, 500, 9);
        assert!(sample(&a, &p).unwrap().indices().iter().all(|&i| i == 1));
    }

    #[test]
    fn sampling_is_deterministic_and_dedups() {
        let a = Matrix::from_fn(10, 10, |i, j| (i + 2 * j) as f64);
        let p = plan(Axis::Rows, SamplingScheme::Length, 25, 3);
        let x = sample(&a, &p).unwrap();
        assert_eq!(x, sample(&a, &p).unwrap());
        let d = sample(&a, &p.clone().with_dedup(true)).unwrap();
        assert_eq!(d, x.dedup());
    }

    #[test]
    fn gram_deviation_exact_for_single_row() {
        let mut a = Matrix::zeros(4, 3);
        a.row_mut(2).copy_from_slice(&[1.0, -2.0, 0.5]);
        let probs = vec![0.0, 0.0, 1.0, 0.0];
        for d in [1, 3, 7] {
            let rows = IndexList::new(vec![2; d], 4).unwrap();
            assert!(gram_deviation(&a, &rows, &probs).unwrap() < 1e-12);
        }
        let rows = IndexList::new(vec![0], 4).unwrap();
        assert!(matches!(gram_deviation(&a, &rows, &probs), Err(CurError::Domain(_))));
    }

    #[test]
    fn gram_estimator_is_unbiased() {
        // Σᵢ pᵢ · xᵢxᵢᵀ/pᵢ = AᵀA, so a weighted sum over all rows is exact.
        let a = Matrix::from_fn(5, 3, |i, j| ((i * 3 + j) as f64).sin());
        let p = distribution(&a, Axis::Rows, &SamplingScheme::Length).unwrap();
        let mut acc = Matrix::zeros(3, 3);
        for i in 0..5 {
            let x = a.row(i).transpose();
            acc += &x * x.transpose();
        }
        assert!((acc - a.transpose() * &a).norm() < 1e-12);
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn full_support_sampling_succeeds() {
        let mut rng = RngStream::new(4, 0);
        let a = crate::random::gen_lowrank(12, 9, 3, &mut rng, true).unwrap();
        for seed in 0..10 {
            // Enough draws to cover every index, deduplicated back to full size.
            let rows = plan(Axis::Rows, SamplingScheme::Uniform, 400, seed).with_dedup(true);
            let cols = plan(Axis::Columns, SamplingScheme::Uniform, 400, seed + 100).with_dedup(true);
            let s = sample_cur(&a, &rows, &cols, MiddleKind::PinvU, None).unwrap();
            assert_eq!((s.factors.row_idx.len(), s.factors.col_idx.len()), (12, 9));
            assert!(s.success);
        }
    }

    #[test]
    fn rank_one_single_draw_succeeds() {
        let a = Matrix::from_fn(6, 5, |i, j| (i + 1) as f64 * (j + 2) as f64);
        for seed in 0..20 {
            let rows = plan(Axis::Rows, SamplingScheme::Length, 1, seed);
            let cols = plan(Axis::Columns, SamplingScheme::Length, 1, seed + 1000);
            assert!(sample_cur(&a, &rows, &cols, MiddleKind::PinvU, None).unwrap().success);
        }
    }

    #[test]
    fn oversampling_counts() {
        assert_eq!(oversampled_count(1, 3.0), 3);
        assert_eq!(oversampled_count(2, 3.0), 5);
        assert_eq!(oversampled_count(10, 3.0), 70);
        assert_eq!(oversampled_count(10, 1.0), 24);
        assert_eq!(oversampled_count(3, 1.0), 5);
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("length".parse::<SamplingScheme>().unwrap(), SamplingScheme::Length);
        assert_eq!("leverage:4".parse::<SamplingScheme>().unwrap(), SamplingScheme::Leverage { k: 4 });
        assert!("leverage:0".parse::<SamplingScheme>().is_err());
        assert!("volume".parse::<SamplingScheme>().is_err());
    }

    #[test]
    fn mixture() {
        let m = mix(&[1.0, 0.0], &[0.5, 0.5], 0.5).unwrap();
        assert_eq!(m, vec![0.75, 0.25]);
        assert!(mix(&[1.0], &[0.5, 0.5], 0.5).is_err());
    }
}
