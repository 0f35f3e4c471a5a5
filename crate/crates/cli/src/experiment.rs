//! Monte-Carlo experiments over noisy low-rank matrices.
//!
//! Every trial draws from `RngStream::new(seed, trial)`. The matrix and noise
//! for a cell come from a fork keyed by the cell's matrix key, so schemes
//! compared within one trial see the same `A` and `E`; index sampling uses a
//! separate fork per cell. Trials run on a rayon pool whose size is capped
//! by `CURKIT_THREADS`, and results are assembled in cell and trial order.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use curkit::cur::{extract, reconstruct, MiddleKind};
use curkit::linalg::{pinv_truncated, Matrix};
use curkit::norm::{norm, NormKind};
use curkit::perturb::{bound_prop_pb, bound_prop_perturbation, bound_thm_pb, BoundReport, NoisySplit};
use curkit::random::{gen_lowrank, gen_noise, RngStream};
use curkit::rankest::estimate_rank;
use curkit::sampling::{distribution, mix, oversampled_count, sample, Axis, SamplingPlan, SamplingScheme};
use curkit::{CurError, IndexList, Result};

use crate::stats::{box_stats, median, summarize};
use crate::svg::{box_chart, line_chart};
use crate::table::{fmt_f64, ResultTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentId {
    /// Relative error of `C̃Ũ†R̃` against the rank, with `⌈k ln k⌉` samples.
    SchemeVsRank,
    /// Relative error against the number of sampled rows and columns.
    ErrorVsCount,
    /// Relative error of `C̃Ũ_r†R̃` against the enforced rank `r`.
    EnforcedRank,
    /// Bound-to-error ratios of the perturbation bounds.
    BoundRatios,
    /// Closed-form bound ratio against the rank.
    RatioVsRank,
    /// Closed-form bound ratio against the matrix size.
    RatioVsSize,
    /// Estimated rank against the noise level.
    RankNoise,
    /// Estimated rank against the sampled block size.
    RankSize,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::SchemeVsRank,
        ExperimentId::ErrorVsCount,
        ExperimentId::EnforcedRank,
        ExperimentId::BoundRatios,
        ExperimentId::RatioVsRank,
        ExperimentId::RatioVsSize,
        ExperimentId::RankNoise,
        ExperimentId::RankSize,
    ];
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExperimentId::SchemeVsRank => "1",
            ExperimentId::ErrorVsCount => "2",
            ExperimentId::EnforcedRank => "3",
            ExperimentId::BoundRatios => "4",
            ExperimentId::RatioVsRank => "5",
            ExperimentId::RatioVsSize => "6",
            ExperimentId::RankNoise => "rank-noise",
            ExperimentId::RankSize => "rank-size",
        };
        f.write_str(s)
    }
}

impl FromStr for ExperimentId {
    type Err = CurError;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.to_string() == s.trim())
            .ok_or_else(|| CurError::Usage(format!("unknown experiment '{s}' (expected 1-6, rank-noise or rank-size)")))
    }
}

/// Sampling schemes by name; the leverage rank is the cell's `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeName {
    Leverage,
    Length,
    Uniform,
    /// Equal mixture of length and uniform probabilities.
    Mixed,
}

impl SchemeName {
    pub fn scheme(self, a: &Matrix, axis: Axis, k: usize) -> Result<SamplingScheme> {
        Ok(match self {
            SchemeName::Leverage => SamplingScheme::Leverage { k },
            SchemeName::Length => SamplingScheme::Length,
            SchemeName::Uniform => SamplingScheme::Uniform,
            SchemeName::Mixed => {
                let length = distribution(a, axis, &SamplingScheme::Length)?;
                let uniform = distribution(a, axis, &SamplingScheme::Uniform)?;
                SamplingScheme::Custom(mix(&length, &uniform, 0.5)?)
            }
        })
    }
}

impl fmt::Display for SchemeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeName::Leverage => "leverage",
            SchemeName::Length => "length",
            SchemeName::Uniform => "uniform",
            SchemeName::Mixed => "mixed",
        })
    }
}

impl FromStr for SchemeName {
    type Err = CurError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "leverage" => Ok(SchemeName::Leverage),
            "length" => Ok(SchemeName::Length),
            "uniform" => Ok(SchemeName::Uniform),
            "mixed" => Ok(SchemeName::Mixed),
            _ => Err(CurError::Usage(format!("unknown scheme '{s}' (expected leverage, length, uniform or mixed)"))),
        }
    }
}

/// Draws `count` rows and columns of `a` under the named scheme.
pub fn sample_pair(a: &Matrix, scheme: SchemeName, k: usize, count: usize, rng: &RngStream) -> Result<(IndexList, IndexList)> {
    let rows = SamplingPlan::new(Axis::Rows, scheme.scheme(a, Axis::Rows, k)?, count, rng.fork(0))?;
    let cols = SamplingPlan::new(Axis::Columns, scheme.scheme(a, Axis::Columns, k)?, count, rng.fork(1))?;
    Ok((sample(a, &rows)?, sample(a, &cols)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub ks: Vec<usize>,
    pub sigma: f64,
    pub sigmas: Vec<f64>,
    pub d: usize,
    pub ds: Vec<usize>,
    pub rs: Vec<usize>,
    pub sizes: Vec<usize>,
    pub schemes: Vec<SchemeName>,
    pub trials: usize,
    pub seed: u64,
    pub norm: NormKind,
}

const ALL_SCHEMES: [SchemeName; 3] = [SchemeName::Leverage, SchemeName::Length, SchemeName::Uniform];

impl ExperimentConfig {
    /// Desk-scale defaults: 200 × 200 matrices and modest trial counts.
    pub fn desk(id: ExperimentId) -> Self {
        let base = ExperimentConfig {
            id,
            m: 200,
            n: 200,
            k: 10,
            ks: vec![10],
            sigma: 1e-4,
            sigmas: vec![1e-4],
            d: 60,
            ds: vec![60],
            rs: vec![10],
            sizes: vec![200],
            schemes: ALL_SCHEMES.to_vec(),
            trials: 20,
            seed: 0,
            norm: NormKind::Spectral,
        };
        match id {
            ExperimentId::SchemeVsRank => ExperimentConfig { ks: (1..=20).collect(), sigma: 1e-5, ..base },
            ExperimentId::ErrorVsCount => ExperimentConfig { ds: (15..=50).step_by(5).collect(), sigma: 1e-5, ..base },
            ExperimentId::EnforcedRank => ExperimentConfig {
                d: 40,
                rs: (10..=40).step_by(5).collect(),
                schemes: vec![SchemeName::Uniform],
                ..base
            },
            ExperimentId::BoundRatios => ExperimentConfig { trials: 50, ..base },
            ExperimentId::RatioVsRank => ExperimentConfig { ks: vec![2, 5, 10, 15, 20], ..base },
            ExperimentId::RatioVsSize => ExperimentConfig { sizes: vec![100, 200, 300], ..base },
            ExperimentId::RankNoise => ExperimentConfig {
                d: 40,
                sigmas: vec![1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1],
                schemes: vec![SchemeName::Length],
                trials: 50,
                ..base
            },
            ExperimentId::RankSize => ExperimentConfig {
                ds: vec![10, 15, 20, 30, 40, 60],
                schemes: vec![SchemeName::Length],
                trials: 50,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |msg: String| Err(CurError::Usage(msg));
        if self.trials == 0 {
            return usage("trials must be >= 1".into());
        }
        if self.schemes.is_empty() {
            return usage("scheme list is empty".into());
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return usage(format!("sigma must be finite and >= 0, got {}", self.sigma));
        }
        let (ranks, sizes): (&[usize], Vec<(usize, usize)>) = match self.id {
            ExperimentId::SchemeVsRank | ExperimentId::RatioVsRank => (&self.ks, vec![(self.m, self.n)]),
            ExperimentId::RatioVsSize => (std::slice::from_ref(&self.k), self.sizes.iter().map(|&s| (s, s)).collect()),
            _ => (std::slice::from_ref(&self.k), vec![(self.m, self.n)]),
        };
        if ranks.is_empty() || sizes.is_empty() {
            return usage("parameter sweep is empty".into());
        }
        for &k in ranks {
            for &(m, n) in &sizes {
                if k == 0 || k > m.min(n) {
                    return usage(format!("rank {k} outside 1..={} for {m}x{n}", m.min(n)));
                }
            }
        }
        match self.id {
            ExperimentId::ErrorVsCount | ExperimentId::RankSize if self.ds.is_empty() || self.ds.contains(&0) => {
                usage("counts must be a nonempty list of positive integers".into())
            }
            ExperimentId::EnforcedRank if self.rs.is_empty() || self.rs.iter().any(|&r| r == 0 || r > self.d) => {
                usage(format!("enforced ranks must lie in 1..={}", self.d))
            }
            ExperimentId::RankNoise if self.sigmas.is_empty() || self.sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) => {
                usage("noise levels must be a nonempty list of positive numbers".into())
            }
            ExperimentId::RankSize if !(self.sigma > 0.0) => usage("rank estimation needs sigma > 0".into()),
            _ if self.d == 0 => usage("count must be >= 1".into()),
            _ => Ok(()),
        }
    }
}

/// One trial of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub cell: Vec<String>,
    /// Position on the swept axis.
    pub x: f64,
    pub series: String,
    pub trial: usize,
    /// NaN where the quantity is undefined, e.g. a violated hypothesis.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub cell_columns: Vec<String>,
    pub metric_columns: Vec<String>,
    pub records: Vec<TrialRecord>,
}

impl ExperimentOutput {
    pub fn metric(&self, name: &str) -> Option<usize> {
        self.metric_columns.iter().position(|c| c == name)
    }

    /// Values of `metric` over the records accepted by `keep`.
    pub fn values(&self, metric: &str, keep: impl Fn(&TrialRecord) -> bool) -> Vec<f64> {
        let j = self.metric(metric).unwrap_or_else(|| panic!("no metric '{metric}'"));
        self.records.iter().filter(|r| keep(r)).map(|r| r.values[j]).collect()
    }

    pub fn trials_table(&self) -> ResultTable {
        let mut header = vec!["experiment".to_string()];
        header.extend(self.cell_columns.iter().cloned());
        header.push("trial".into());
        header.extend(self.metric_columns.iter().cloned());
        let mut t = ResultTable::new(header);
        for r in &self.records {
            let mut row = vec![self.config.id.to_string()];
            row.extend(r.cell.iter().cloned());
            row.push(r.trial.to_string());
            row.extend(r.values.iter().map(|v| fmt_f64(*v)));
            t.push(row);
        }
        t
    }

    fn cells(&self) -> Vec<(&[String], f64, &str)> {
        let mut out: Vec<(&[String], f64, &str)> = Vec::new();
        for r in &self.records {
            if out.last().map(|c| c.0) != Some(r.cell.as_slice()) {
                out.push((&r.cell, r.x, &r.series));
            }
        }
        out
    }

    /// Per cell and metric: count of defined values, mean, median, quartiles.
    pub fn summary_table(&self) -> ResultTable {
        let mut header: Vec<String> = self.cell_columns.clone();
        header.extend(["metric", "count", "mean", "median", "q1", "q3", "min", "max"].map(String::from));
        let mut t = ResultTable::new(header);
        for (cell, _, _) in self.cells() {
            for (j, name) in self.metric_columns.iter().enumerate() {
                let vals: Vec<f64> = self.records.iter().filter(|r| r.cell == cell).map(|r| r.values[j]).collect();
                let s = summarize(&vals);
                let mut row = cell.to_vec();
                row.push(name.clone());
                row.push(s.count.to_string());
                row.extend([s.mean, s.median, s.q1, s.q3, s.min, s.max].map(fmt_f64));
                t.push(row);
            }
        }
        t
    }

    /// Medians of `metric` per series along the swept axis.
    pub fn median_curves(&self, metric: &str) -> Vec<(String, Vec<(f64, f64)>)> {
        let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        for (cell, x, name) in self.cells() {
            let m = median(&self.values(metric, |r| r.cell == cell));
            match series.iter_mut().find(|(s, _)| s == name) {
                Some((_, pts)) => pts.push((x, m)),
                None => series.push((name.to_string(), vec![(x, m)])),
            }
        }
        series
    }

    pub fn svg(&self) -> String {
        let title = format!("experiment {}", self.config.id);
        if self.config.id == ExperimentId::BoundRatios {
            let mut boxes = Vec::new();
            for metric in self.metric_columns.iter().filter(|m| m.starts_with("ratio_")) {
                for scheme in &self.config.schemes {
                    let name = scheme.to_string();
                    if let Some(b) = box_stats(&self.values(metric, |r| r.series == name)) {
                        boxes.push((format!("{}/{}", metric.trim_start_matches("ratio_"), name), b));
                    }
                }
            }
            let log = boxes.iter().all(|(_, b)| b.whisker_low > 0.0);
            return box_chart(&title, "bound / true error", &boxes, log);
        }
        let metric = self.metric_columns[0].as_str();
        let curves = self.median_curves(metric);
        let ys: Vec<f64> = curves.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)).filter(|y| y.is_finite()).collect();
        let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_y = lo > 0.0 && hi / lo > 100.0;
        let log_x = self.config.id == ExperimentId::RankNoise;
        line_chart(&title, &self.cell_columns[0], &format!("median {metric}"), &curves, log_x, log_y)
    }
}

/// A set of cells evaluated together on one sample.
struct Group {
    cells: Vec<Vec<String>>,
    xs: Vec<f64>,
    series: String,
    /// Cells with equal keys share `A` and `E` within a trial.
    matrix_key: u64,
    m: usize,
    n: usize,
    k: usize,
    scheme: SchemeName,
}

enum Noise {
    /// Rescaled so that `‖E‖₂` equals the level.
    Spectral(f64),
    /// i.i.d. entries with the level as standard deviation.
    Entry(f64),
}

const SAMPLE_LANE: u64 = 1 << 32;

fn instance(base: &RngStream, key: u64, m: usize, n: usize, k: usize, noise: Noise) -> Result<(Matrix, Matrix)> {
    let mut rng = base.fork(key);
    let a = gen_lowrank(m, n, k, &mut rng, true)?;
    let e = match noise {
        Noise::Spectral(s) => gen_noise(m, n, 1.0, &mut rng, Some(s))?,
        Noise::Entry(s) => gen_noise(m, n, s, &mut rng, None)?,
    };
    Ok((a, e))
}

/// Absolute slack for bound soundness; values below it count as zero.
pub const SOUNDNESS_SLACK: f64 = 1e-9;

/// Both the bound and the error vanish up to [`SOUNDNESS_SLACK`].
pub fn is_exact(r: &BoundReport) -> bool {
    r.true_error <= SOUNDNESS_SLACK && r.bound_value <= SOUNDNESS_SLACK
}

/// `bound / true`, with an exact pair read as 1.
pub fn bound_ratio(r: &BoundReport) -> f64 {
    if is_exact(r) {
        1.0
    } else {
        r.ratio().unwrap_or(f64::INFINITY)
    }
}

fn hypothesis_or_nan(r: Result<BoundReport>) -> Result<Option<BoundReport>> {
    match r {
        Ok(rep) => Ok(Some(rep)),
        Err(CurError::Hypothesis(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn relative_error(a: &Matrix, approx: &Matrix, kind: NormKind) -> Result<f64> {
    Ok(norm(&(a - approx), kind)? / norm(a, kind)?)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("CURKIT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| CurError::Usage(format!("CURKIT_THREADS must be a positive integer, got '{v}'")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CurError::Usage(format!("cannot start worker threads: {e}")))
}

fn groups(cfg: &ExperimentConfig) -> (Vec<&'static str>, Vec<&'static str>, Vec<Group>) {
    let mut out = Vec::new();
    let single = |cell: Vec<String>, x: f64, scheme: SchemeName, key: u64, m: usize, k: usize| Group {
        cells: vec![cell],
        xs: vec![x],
        series: scheme.to_string(),
        matrix_key: key,
        m,
        n: cfg.n,
        k,
        scheme,
    };
    let ratio_metrics = vec!["ratio_thm_pb", "ratio_prop_pb"];
    let (cells, metrics) = match cfg.id {
        ExperimentId::SchemeVsRank => {
            for (i, &k) in cfg.ks.iter().enumerate() {
                let d = oversampled_count(k, 1.0);
                for &s in &cfg.schemes {
                    out.push(single(vec![k.to_string(), s.to_string(), d.to_string()], k as f64, s, i as u64, cfg.m, k));
                }
            }
            (vec!["k", "scheme", "d"], vec!["relative_error"])
        }
        ExperimentId::ErrorVsCount => {
            for &d in &cfg.ds {
                for &s in &cfg.schemes {
                    out.push(single(vec![d.to_string(), s.to_string()], d as f64, s, 0, cfg.m, cfg.k));
                }
            }
            (vec!["d", "scheme"], vec!["relative_error"])
        }
        ExperimentId::EnforcedRank => {
            for &s in &cfg.schemes {
                out.push(Group {
                    cells: cfg.rs.iter().map(|r| vec![s.to_string(), r.to_string()]).collect(),
                    xs: cfg.rs.iter().map(|&r| r as f64).collect(),
                    series: s.to_string(),
                    matrix_key: 0,
                    m: cfg.m,
                    n: cfg.n,
                    k: cfg.k,
                    scheme: s,
                });
            }
            (vec!["scheme", "r"], vec!["relative_error"])
        }
        ExperimentId::BoundRatios => {
            for &s in &cfg.schemes {
                out.push(single(vec![s.to_string()], 0.0, s, 0, cfg.m, cfg.k));
            }
            (
                vec!["scheme"],
                vec!["ratio_prop_perturbation", "ratio_prop_pb", "ratio_thm_pb", "ratio_thm_pb_refined", "sound"],
            )
        }
        ExperimentId::RatioVsRank => {
            for (i, &k) in cfg.ks.iter().enumerate() {
                for &s in &cfg.schemes {
                    out.push(single(vec![k.to_string(), s.to_string()], k as f64, s, i as u64, cfg.m, k));
                }
            }
            (vec!["k", "scheme"], ratio_metrics)
        }
        ExperimentId::RatioVsSize => {
            for (i, &size) in cfg.sizes.iter().enumerate() {
                for &s in &cfg.schemes {
                    let mut g = single(vec![size.to_string(), s.to_string()], size as f64, s, i as u64, size, cfg.k);
                    g.n = size;
                    out.push(g);
                }
            }
            (vec!["m", "scheme"], ratio_metrics)
        }
        ExperimentId::RankNoise => {
            for &sigma in &cfg.sigmas {
                for &s in &cfg.schemes {
                    out.push(single(vec![format!("{sigma:e}"), s.to_string()], sigma, s, 0, cfg.m, cfg.k));
                }
            }
            (vec!["sigma", "scheme"], vec!["k_hat", "correct"])
        }
        ExperimentId::RankSize => {
            for &d in &cfg.ds {
                for &s in &cfg.schemes {
                    out.push(single(vec![d.to_string(), s.to_string()], d as f64, s, 0, cfg.m, cfg.k));
                }
            }
            (vec!["d", "scheme"], vec!["k_hat", "correct"])
        }
    };
    (cells, metrics, out)
}

/// Evaluates every cell of `g` for one trial; one value row per cell.
fn run_group(cfg: &ExperimentConfig, g: &Group, gi: usize, trial: usize) -> Result<Vec<Vec<f64>>> {
    let base = RngStream::new(cfg.seed, trial as u64);
    let sampler = base.fork(SAMPLE_LANE + gi as u64);
    let (m, n, k) = (g.m, g.n, g.k);
    match cfg.id {
        ExperimentId::SchemeVsRank | ExperimentId::ErrorVsCount => {
            let d = if cfg.id == ExperimentId::SchemeVsRank { oversampled_count(k, 1.0) } else { g.xs[0] as usize };
            let (a, e) = instance(&base, g.matrix_key, m, n, k, Noise::Spectral(cfg.sigma))?;
            let at = &a + &e;
            let (rows, cols) = sample_pair(&at, g.scheme, k, d, &sampler)?;
            let f = extract(&at, &rows, &cols, MiddleKind::PinvU)?;
            Ok(vec![vec![relative_error(&a, &reconstruct(&f, None)?, cfg.norm)?]])
        }
        ExperimentId::EnforcedRank => {
            let (a, e) = instance(&base, g.matrix_key, m, n, k, Noise::Entry(cfg.sigma))?;
            let at = &a + &e;
            let (rows, cols) = sample_pair(&at, g.scheme, k, cfg.d, &sampler)?;
            let f = extract(&at, &rows, &cols, MiddleKind::PinvU)?;
            let scale = norm(&a, cfg.norm)?;
            cfg.rs
                .iter()
                .map(|&r| {
                    let approx = &f.c * pinv_truncated(&f.u, r, None)? * &f.r;
                    Ok(vec![norm(&(&a - approx), cfg.norm)? / scale])
                })
                .collect()
        }
        ExperimentId::BoundRatios | ExperimentId::RatioVsRank | ExperimentId::RatioVsSize => {
            let (a, e) = instance(&base, g.matrix_key, m, n, k, Noise::Entry(cfg.sigma))?;
            let at = &a + &e;
            let (rows, cols) = sample_pair(&at, g.scheme, k, cfg.d, &sampler)?;
            let split = NoisySplit::new(a, e, rows, cols, k)?;
            let pb = hypothesis_or_nan(bound_prop_pb(&split, cfg.norm))?;
            let thm = hypothesis_or_nan(bound_thm_pb(&split, cfg.norm, false))?;
            let ratio = |r: &Option<BoundReport>| r.as_ref().map_or(f64::NAN, bound_ratio);
            if cfg.id != ExperimentId::BoundRatios {
                return Ok(vec![vec![ratio(&thm), ratio(&pb)]]);
            }
            let full = bound_prop_perturbation(&split, cfg.norm)?;
            let full = full.hypothesis_ok.then_some(full);
            let refined = hypothesis_or_nan(bound_thm_pb(&split, cfg.norm, true))?;
            let reports = [&full, &pb, &thm, &refined];
            let sound = reports.iter().all(|r| r.as_ref().map_or(true, |r| r.holds(SOUNDNESS_SLACK)));
            let mut row: Vec<f64> = reports.iter().map(|r| ratio(r)).collect();
            row.push(if sound { 1.0 } else { 0.0 });
            Ok(vec![row])
        }
        ExperimentId::RankNoise | ExperimentId::RankSize => {
            let (sigma, d) = match cfg.id {
                ExperimentId::RankNoise => (g.xs[0], cfg.d),
                _ => (cfg.sigma, g.xs[0] as usize),
            };
            let (a, e) = instance(&base, g.matrix_key, m, n, k, Noise::Entry(sigma))?;
            let at = &a + &e;
            let rows = SamplingPlan::new(Axis::Rows, g.scheme.scheme(&at, Axis::Rows, k)?, d, sampler.fork(0))?;
            let cols = SamplingPlan::new(Axis::Columns, g.scheme.scheme(&at, Axis::Columns, k)?, d, sampler.fork(1))?;
            let est = estimate_rank(&at, sigma, &rows, &cols)?;
            Ok(vec![vec![est.k_hat as f64, if est.k_hat == k { 1.0 } else { 0.0 }]])
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let (cell_columns, metric_columns, groups) = groups(cfg);
    let jobs: Vec<(usize, usize)> = (0..groups.len()).flat_map(|g| (0..cfg.trials).map(move |t| (g, t))).collect();
    let pool = thread_pool()?;
    let results: Vec<Vec<Vec<f64>>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(g, t)| run_group(cfg, &groups[g], g, t))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut records = Vec::with_capacity(results.len());
    for (gi, g) in groups.iter().enumerate() {
        for (ci, cell) in g.cells.iter().enumerate() {
            for t in 0..cfg.trials {
                records.push(TrialRecord {
                    cell: cell.clone(),
                    x: g.xs[ci],
                    series: g.series.clone(),
                    trial: t,
                    values: results[gi * cfg.trials + t][ci].clone(),
                });
            }
        }
    }
    Ok(ExperimentOutput {
        config: cfg.clone(),
        cell_columns: cell_columns.into_iter().map(String::from).collect(),
        metric_columns: metric_columns.into_iter().map(String::from).collect(),
        records,
    })
}
