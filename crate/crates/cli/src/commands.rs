//! Subcommand implementations. Each writes its primary result to `stdout`
//! or to `--out`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use curkit::cur::{check_equivalences, extract, reconstruct};
use curkit::io::{format_matrix_market, read_matrix, write_factors, write_matrix};
use curkit::linalg::{numerical_rank, Matrix};
use curkit::norm::{norm, NormKind};
use curkit::perturb::{bound_prop_pb, bound_prop_perturbation, bound_thm_pb, BoundReport, NoisySplit};
use curkit::random::{gen_lowrank, gen_noise, RngStream};
use curkit::rankest::{estimate_rank, estimate_rank_at};
use curkit::sampling::{sample, Axis, SamplingPlan, SamplingScheme};
use curkit::{CurError, IndexList, MiddleKind, Result};

use crate::args::{ApproxArgs, BoundsArgs, Cli, Command, DecomposeArgs, ExperimentArgs, GenArgs, RankestArgs, SampleArgs, Selection};
use crate::experiment::{bound_ratio, is_exact, run_experiment, ExperimentConfig, SchemeName};
use crate::table::{fmt_f64, ResultTable};

/// Exit status for an error: 3 for a violated hypothesis, 1 for a numerical
/// failure, 2 for bad input.
pub fn exit_code(err: &CurError) -> u8 {
    match err {
        CurError::Hypothesis(_) => 3,
        CurError::SvdNonConvergence { .. } => 1,
        _ => 2,
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Decompose(a) => decompose(cli, a, stdout),
        Command::Approx(a) => approx(cli, a, stdout),
        Command::Sample(a) => sample_cmd(cli, a, stdout),
        Command::Bounds(a) => bounds(cli, a, stdout),
        Command::Rankest(a) => rankest(cli, a, stdout),
        Command::Experiment(a) => experiment(cli, a, stdout),
        Command::Gen(a) => generate(cli, a, stdout),
    }
}

/// Parses a scheme name, accepting `mixed` for half length, half uniform.
pub fn resolve_scheme(name: &str, a: &Matrix, axis: Axis) -> Result<SamplingScheme> {
    if name.trim().eq_ignore_ascii_case("mixed") {
        return SchemeName::Mixed.scheme(a, axis, 1);
    }
    name.parse()
}

fn selection_rng(seed: u64) -> RngStream {
    RngStream::new(seed, 0)
}

fn select_axis(a: &Matrix, sel: &Selection, axis: Axis, seed: u64) -> Result<IndexList> {
    let (explicit, count, bound, lane) = match axis {
        Axis::Rows => (&sel.rows, sel.row_count.or(sel.count), a.nrows(), 0),
        Axis::Columns => (&sel.cols, sel.col_count.or(sel.count), a.ncols(), 1),
    };
    if let Some(list) = explicit {
        return IndexList::new(list.clone(), bound);
    }
    let count = count.ok_or_else(|| {
        CurError::Usage(format!("give explicit {0} indices or a count (--count or --{0}-count)", if lane == 0 { "row" } else { "col" }))
    })?;
    let plan = SamplingPlan::new(axis, resolve_scheme(&sel.scheme, a, axis)?, count, selection_rng(seed).fork(lane))?
        .with_dedup(sel.dedup);
    sample(a, &plan)
}

fn select(a: &Matrix, sel: &Selection, seed: u64) -> Result<(IndexList, IndexList)> {
    Ok((select_axis(a, sel, Axis::Rows, seed)?, select_axis(a, sel, Axis::Columns, seed)?))
}

fn norm_set(extra: NormKind) -> Vec<NormKind> {
    let mut kinds = vec![NormKind::Spectral, NormKind::Frobenius];
    if !kinds.contains(&extra) {
        kinds.push(extra);
    }
    kinds
}

/// `({norm: ‖a − b‖}, {norm: ‖a − b‖ / ‖a‖})`
fn error_maps(a: &Matrix, b: &Matrix, kind: NormKind) -> Result<(Value, Value)> {
    let (mut abs, mut rel) = (Map::new(), Map::new());
    let diff = a - b;
    for k in norm_set(kind) {
        let e = norm(&diff, k)?;
        let scale = norm(a, k)?;
        abs.insert(k.to_string(), json!(e));
        rel.insert(k.to_string(), if scale > 0.0 { json!(e / scale) } else { Value::Null });
    }
    Ok((Value::Object(abs), Value::Object(rel)))
}

fn emit(cli: &Cli, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn decompose(cli: &Cli, args: &DecomposeArgs, stdout: &mut dyn Write) -> Result<()> {
    let a = read_matrix(&args.input)?;
    let (rows, cols) = select(&a, &args.selection, cli.seed)?;
    let f = extract(&a, &rows, &cols, args.middle)?;
    let approx = reconstruct(&f, Some(&a))?;
    let (error, relative) = error_maps(&a, &approx, cli.norm)?;
    let eq = check_equivalences(&a, &rows, &cols, args.tol, None)?;
    let summary = json!({
        "shape": [a.nrows(), a.ncols()],
        "rows": rows.indices(),
        "cols": cols.indices(),
        "middle": args.middle.to_string(),
        "error": error,
        "relative_error": relative,
        "ranks": {"a": eq.rank_a, "c": eq.rank_c, "r": eq.rank_r, "u": eq.rank_u},
        "equivalences": {
            "rank_u_equals_rank_a": eq.holds_rank_match,
            "cur_reproduces_a": eq.cur.holds,
            "projection_reproduces_a": eq.proj.holds,
            "pinv_formula": eq.pinv_formula.holds,
            "rank_c_and_r_equal_rank_a": eq.holds_spans,
            "residuals": {"cur": eq.cur.residual, "projection": eq.proj.residual, "pinv_formula": eq.pinv_formula.residual},
            "coherent": eq.coherent(),
        },
    });
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    if let Some(dir) = &cli.out {
        write_factors(dir, &f)?;
        fs::write(dir.join("summary.json"), &text)?;
    }
    stdout.write_all(text.as_bytes())?;
    Ok(())
}

fn approx(cli: &Cli, args: &ApproxArgs, stdout: &mut dyn Write) -> Result<()> {
    let a = read_matrix(&args.input)?;
    let (rows, cols) = select(&a, &args.selection, cli.seed)?;
    let middle = match args.rank {
        Some(0) => return Err(CurError::Usage("--rank must be >= 1".into())),
        Some(rank) => MiddleKind::PinvTruncatedU { rank },
        None => args.middle,
    };
    let f = extract(&a, &rows, &cols, middle)?;
    let approx = reconstruct(&f, Some(&a))?;
    let reference = match &args.reference {
        Some(p) => read_matrix(p)?,
        None => a.clone(),
    };
    if reference.shape() != a.shape() {
        return Err(CurError::Shape(format!("reference is {:?} but input is {:?}", reference.shape(), a.shape())));
    }
    let (error, relative) = error_maps(&reference, &approx, cli.norm)?;
    let summary = json!({
        "rows": rows.indices(),
        "cols": cols.indices(),
        "middle": middle.to_string(),
        "error": error,
        "relative_error": relative,
    });
    if let Some(path) = &cli.out {
        write_matrix(path, &approx)?;
    }
    stdout.write_all((serde_json::to_string_pretty(&summary)? + "\n").as_bytes())?;
    Ok(())
}

fn sample_cmd(cli: &Cli, args: &SampleArgs, stdout: &mut dyn Write) -> Result<()> {
    let a = read_matrix(&args.input)?;
    let lane = if args.axis == Axis::Rows { 0 } else { 1 };
    let plan = SamplingPlan::new(args.axis, resolve_scheme(&args.scheme, &a, args.axis)?, args.d, selection_rng(cli.seed).fork(lane))?
        .with_dedup(args.dedup);
    let idx = sample(&a, &plan)?;
    let line: Vec<String> = idx.indices().iter().map(|i| i.to_string()).collect();
    emit(cli, &(line.join(",") + "\n"), stdout)
}

const BOUND_NAMES: [&str; 4] = ["prop-perturbation", "prop-pb", "thm-pb", "thm-pb-refined"];

fn bounds(cli: &Cli, args: &BoundsArgs, stdout: &mut dyn Write) -> Result<()> {
    let a = read_matrix(&args.input)?;
    let e = match (&args.noise, args.sigma) {
        (Some(p), _) => read_matrix(p)?,
        (None, Some(s)) => gen_noise(a.nrows(), a.ncols(), s, &mut RngStream::new(cli.seed, 1), None)?,
        (None, None) => Matrix::zeros(a.nrows(), a.ncols()),
    };
    let (rows, cols) = select(&(&a + &e), &args.selection, cli.seed)?;
    let k = match args.k {
        Some(k) => k,
        None => numerical_rank(&a, None)?.max(1),
    };
    let split = NoisySplit::new(a, e, rows, cols, k)?;
    let wanted: Vec<&str> = match args.bound.as_str() {
        "all" => BOUND_NAMES.to_vec(),
        name if BOUND_NAMES.contains(&name) => vec![name],
        other => return Err(CurError::Usage(format!("unknown bound '{other}' (expected all or one of {})", BOUND_NAMES.join(", ")))),
    };
    let mut table = ResultTable::new(
        ["bound", "norm", "mu", "hypothesis_ok", "true_error", "bound_value", "ratio", "terms"].map(String::from).to_vec(),
    );
    let mut violated = Vec::new();
    for name in wanted {
        let report = match name {
            "prop-perturbation" => bound_prop_perturbation(&split, cli.norm),
            "prop-pb" => bound_prop_pb(&split, cli.norm),
            "thm-pb" => bound_thm_pb(&split, cli.norm, false),
            _ => bound_thm_pb(&split, cli.norm, true),
        };
        match report {
            Ok(r) => {
                if !r.hypothesis_ok {
                    violated.push(format!("{name}: rank(U), rank(C), rank(R) differ"));
                }
                table.push(bound_row(name, &r));
            }
            Err(CurError::Hypothesis(msg)) => {
                violated.push(format!("{name}: {msg}"));
                table.push(vec![name.into(), cli.norm.to_string(), "".into(), "false".into(), "".into(), "".into(), "".into(), "".into()]);
            }
            Err(e) => return Err(e),
        }
    }
    emit(cli, &table.to_csv(), stdout)?;
    if violated.is_empty() {
        Ok(())
    } else {
        Err(CurError::Hypothesis(violated.join("; ")))
    }
}

fn bound_row(name: &str, r: &BoundReport) -> Vec<String> {
    let ratio = if is_exact(r) { "exact".to_string() } else { fmt_f64(bound_ratio(r)) };
    let terms: Vec<String> = r.terms.iter().map(|(n, v)| format!("{n}={}", fmt_f64(*v))).collect();
    vec![
        name.into(),
        r.norm.to_string(),
        fmt_f64(r.mu),
        r.hypothesis_ok.to_string(),
        fmt_f64(r.true_error),
        fmt_f64(r.bound_value),
        ratio,
        terms.join(";"),
    ]
}

fn rankest(cli: &Cli, args: &RankestArgs, stdout: &mut dyn Write) -> Result<()> {
    let a = read_matrix(&args.input)?;
    let sel = &args.selection;
    let est = match (&sel.rows, &sel.cols) {
        (Some(r), Some(c)) => {
            estimate_rank_at(&a, args.sigma, IndexList::new(r.clone(), a.nrows())?, IndexList::new(c.clone(), a.ncols())?)?
        }
        (None, None) => {
            let plan = |axis: Axis, count: Option<usize>, lane: u64| -> Result<SamplingPlan> {
                let count = count.ok_or_else(|| CurError::Usage("give --rows and --cols, or a count".into()))?;
                Ok(SamplingPlan::new(axis, resolve_scheme(&sel.scheme, &a, axis)?, count, selection_rng(cli.seed).fork(lane))?
                    .with_dedup(sel.dedup))
            };
            let rows = plan(Axis::Rows, sel.row_count.or(sel.count), 0)?;
            let cols = plan(Axis::Columns, sel.col_count.or(sel.count), 1)?;
            estimate_rank(&a, args.sigma, &rows, &cols)?
        }
        _ => return Err(CurError::Usage("explicit indices must be given for both rows and columns".into())),
    };
    if let Some(path) = &cli.out {
        let mut t = ResultTable::new(["k_hat", "threshold", "cutoff", "index", "singular_value", "counted"].map(String::from).to_vec());
        for (i, s) in est.singulars_of_u.iter().enumerate() {
            t.push(vec![
                est.k_hat.to_string(),
                fmt_f64(est.threshold),
                fmt_f64(est.singular_cutoff()),
                (i + 1).to_string(),
                fmt_f64(*s),
                (i < est.k_hat).to_string(),
            ]);
        }
        fs::write(path, t.to_csv())?;
    }
    writeln!(stdout, "{}", est.k_hat)?;
    Ok(())
}

fn experiment_config(cli: &Cli, args: &ExperimentArgs) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::desk(args.id);
    cfg.seed = cli.seed;
    cfg.norm = cli.norm;
    if let Some(m) = args.m {
        cfg.m = m;
        cfg.n = m;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(ks) = &args.ks {
        cfg.ks = ks.clone();
    }
    if let Some(s) = args.sigma {
        cfg.sigma = s;
    }
    if let Some(s) = &args.sigmas {
        cfg.sigmas = s.clone();
    }
    if let Some(d) = args.d {
        cfg.d = d;
    }
    if let Some(ds) = &args.ds {
        cfg.ds = ds.clone();
    }
    if let Some(rs) = &args.rs {
        cfg.rs = rs.clone();
    }
    if let Some(sizes) = &args.sizes {
        cfg.sizes = sizes.clone();
    }
    if let Some(s) = &args.schemes {
        cfg.schemes = s.clone();
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    cfg
}

/// `dir/stem.suffix` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "experiment".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn experiment(cli: &Cli, args: &ExperimentArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = experiment_config(cli, args);
    let out = run_experiment(&cfg)?;
    let summary = out.summary_table().to_csv();
    match &cli.out {
        Some(path) => {
            fs::write(path, &summary)?;
            fs::write(sibling(path, "trials.csv"), out.trials_table().to_csv())?;
        }
        None => stdout.write_all(summary.as_bytes())?,
    }
    if cli.svg {
        let path = match &cli.out {
            Some(p) => sibling(p, "svg"),
            None => PathBuf::from(format!("experiment-{}.svg", cfg.id)),
        };
        fs::write(path, out.svg())?;
    }
    Ok(())
}

fn generate(cli: &Cli, args: &GenArgs, stdout: &mut dyn Write) -> Result<()> {
    let mut rng = RngStream::new(cli.seed, 0);
    let a = gen_lowrank(args.m, args.n, args.k, &mut rng, !args.no_normalize)?;
    let e = if args.spectral_noise {
        gen_noise(args.m, args.n, if args.sigma > 0.0 { 1.0 } else { 0.0 }, &mut rng, Some(args.sigma))?
    } else {
        gen_noise(args.m, args.n, args.sigma, &mut rng, None)?
    };
    let noisy = &a + &e;
    if let Some(p) = &args.noise_out {
        write_matrix(p, &e)?;
    }
    if let Some(p) = &args.clean_out {
        write_matrix(p, &a)?;
    }
    match &cli.out {
        Some(p) => write_matrix(p, &noisy),
        None => Ok(stdout.write_all(format_matrix_market(&noisy).as_bytes())?),
    }
}
