//! Acceptance criteria. One PASS/FAIL line per criterion; the process exits
//! nonzero when any criterion fails without a recorded analysis.

use std::process::{Command, ExitCode};
use std::time::Instant;

use curkit::cur::{check_equivalences, extract, optimal_middle, reconstruct, IndexList, MiddleKind};
use curkit::linalg::{best_rank_approx, numerical_rank, pinv, relative_frobenius, take_block, Matrix};
use curkit::norm::{norm, NormKind};
use curkit::perturb::{norm_terms, pinv_norm_bracket, singular_value_shift, stewart_bound, NoisySplit};
use curkit::random::{gen_lowrank, gen_noise, RngStream};
use curkit::sampling::{distribution, gram_deviation, oversampled_count, sample, sample_cur, Axis, SamplingPlan, SamplingScheme};
use curkit::CurError;
use curkit_cli::experiment::{run_experiment, ExperimentConfig, ExperimentId, SchemeName, SOUNDNESS_SLACK};
use curkit_cli::stats::{median, spearman};

enum Verdict {
    Pass,
    Fail,
    /// Fails for a reason that has been analyzed; reported but not fatal.
    KnownFail(&'static str),
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

fn pass_if(ok: bool, detail: String) -> Outcome {
    Outcome { verdict: if ok { Verdict::Pass } else { Verdict::Fail }, detail }
}

fn distinct(rng: &mut RngStream, bound: usize, count: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..bound).collect();
    for i in 0..count {
        let j = (i + (rng.uniform() * (bound - i) as f64) as usize).min(bound - 1);
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool
}

fn idx(v: Vec<usize>, bound: usize) -> IndexList {
    IndexList::new(v, bound).unwrap()
}

/// Rank-`k` matrix with distinct index sets resampled until `rank(U) = k`.
fn exact_instance(rng: &mut RngStream, m: usize, n: usize, k: usize, p: usize, q: usize) -> (Matrix, IndexList, IndexList) {
    let a = gen_lowrank(m, n, k, rng, true).unwrap();
    loop {
        let (rows, cols) = (distinct(rng, m, p), distinct(rng, n, q));
        if numerical_rank(&take_block(&a, &rows, &cols), None).unwrap() == k {
            return (a, idx(rows, m), idx(cols, n));
        }
    }
}

fn between(rng: &mut RngStream, lo: usize, hi: usize) -> usize {
    lo + ((rng.uniform() * (hi - lo + 1) as f64) as usize).min(hi - lo)
}

fn exact_cur() -> Outcome {
    let mut worst = 0.0f64;
    let mut ok = 0;
    for t in 0..500u64 {
        let mut rng = RngStream::new(101, t);
        let (m, n) = (between(&mut rng, 12, 120), between(&mut rng, 12, 120));
        let k = between(&mut rng, 1, 12);
        let (p, q) = (between(&mut rng, k, (2 * k).min(m)), between(&mut rng, k, (2 * k).min(n)));
        let (a, rows, cols) = exact_instance(&mut rng, m, n, k, p, q);
        let f = extract(&a, &rows, &cols, MiddleKind::PinvU).unwrap();
        let err = relative_frobenius(&a, &reconstruct(&f, None).unwrap());
        worst = worst.max(err);
        ok += usize::from(err <= 1e-9);
    }
    pass_if(ok == 500, format!("{ok}/500 instances with relative Frobenius error <= 1e-9 (max {worst:.1e})"))
}

fn coherence() -> Outcome {
    let (mut coherent, mut exact, mut deficient) = (0, 0, 0);
    for t in 0..500u64 {
        let mut rng = RngStream::new(202, t);
        let (m, n) = (between(&mut rng, 10, 60), between(&mut rng, 10, 60));
        let k = between(&mut rng, 2, 8);
        let a = gen_lowrank(m, n, k, &mut rng, true).unwrap();
        let (rows, cols) = match t % 4 {
            // Enough distinct rows and columns.
            0 | 1 => (distinct(&mut rng, m, k + t as usize % 3), distinct(&mut rng, n, k + 1)),
            // Too few rows.
            2 => (distinct(&mut rng, m, k - 1), distinct(&mut rng, n, k + 2)),
            // Repeated rows with fewer than k distinct.
            _ => {
                let mut r = distinct(&mut rng, m, k - 1);
                r.extend_from_slice(&r.clone());
                (r, distinct(&mut rng, n, k))
            }
        };
        let rep = check_equivalences(&a, &idx(rows, m), &idx(cols, n), 1e-8, None).unwrap();
        coherent += usize::from(rep.coherent());
        if rep.holds_rank_match {
            exact += 1;
        } else {
            deficient += 1;
        }
    }
    let mut a = Matrix::zeros(4, 4);
    for i in 0..2 {
        a[(i, i + 2)] = 1.0;
        a[(i + 2, i)] = 1.0;
    }
    let (rows, cols) = (idx(vec![0, 1], 4), idx(vec![0, 1], 4));
    let rep = check_equivalences(&a, &rows, &cols, 1e-10, None).unwrap();
    let f = extract(&a, &rows, &cols, MiddleKind::PinvU).unwrap();
    let identity_holds = (pinv(&f.u, None).unwrap() - optimal_middle(&a, &f.c, &f.r).unwrap()).norm() < 1e-12;
    let block_ok = identity_holds && rep.flags() == [false; 5];
    pass_if(
        coherent == 500 && exact > 0 && deficient > 0 && block_ok,
        format!(
            "{coherent}/500 coherent ({exact} with rank(U)=rank(A), {deficient} without); block example: U† = C†AR† {identity_holds}, equivalences {:?}",
            rep.flags()
        ),
    )
}

fn golden() -> Outcome {
    let m2 = |v: [f64; 4]| Matrix::from_row_slice(2, 2, &v);
    let col = |v: [f64; 2]| Matrix::from_column_slice(2, 1, &v);
    let row = |v: [f64; 2]| Matrix::from_row_slice(1, 2, &v);
    let a = m2([1.0, 1.0, 1.0, 2.0]);
    let (c, r) = (col([1.0, 1.0]), row([1.0, 1.0]));
    let z = optimal_middle(&a, &c, &r).unwrap()[(0, 0)];
    let spec = |z: f64| norm(&(&a - &c * &r * z), NormKind::Spectral).unwrap();
    let b = m2([1.0, 2.0, 3.0, 4.0]);
    let (cb, rb) = (col([1.0, 3.0]), row([1.0, 2.0]));
    let car = optimal_middle(&b, &cb, &rb).unwrap()[(0, 0)];
    let min_fro = (&b - &cb * &rb * car).norm();
    let f = extract(&b, &idx(vec![0], 2), &idx(vec![0], 2), MiddleKind::PinvU).unwrap();
    let cur_fro = (&b - reconstruct(&f, None).unwrap()).norm();
    let checks = [
        ("Frobenius-optimal middle 1.25", (z - 1.25).abs() <= 1e-12),
        ("spectral z=1 beats z=1.25", spec(1.0) < spec(1.25)),
        ("C†AR† = 0.76", (car - 0.76).abs() <= 1e-3),
        ("min Frobenius error 1.0583", (min_fro - 1.0583).abs() <= 1e-3),
        ("‖A−CU†R‖_F = 2", (cur_fro - 2.0).abs() <= 1e-12),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = format!(
        "{}/5 sub-checks; z*={z:.12}, ‖A−CR‖₂={:.4}, ‖A−1.25CR‖₂={:.4}, C†AR†={car:.4}, min err={min_fro:.4}, CUR err={cur_fro}",
        5 - failed.len(),
        spec(1.0),
        spec(1.25)
    );
    let verdict = match failed.as_slice() {
        [] => Verdict::Pass,
        ["spectral z=1 beats z=1.25"] => Verdict::KnownFail(
            "for [[1,1],[1,2]] the spectral error of zCR is minimized at z=3/2; z=1 gives 1 and z=1.25 gives 0.809, so the expected ordering cannot hold",
        ),
        _ => Verdict::Fail,
    };
    Outcome { verdict, detail }
}

fn bound_soundness() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for kind in [NormKind::Spectral, NormKind::Frobenius] {
        let cfg = ExperimentConfig {
            m: 200,
            n: 200,
            k: 10,
            sigma: 1e-4,
            d: 60,
            trials: 200,
            seed: 404,
            norm: kind,
            schemes: vec![SchemeName::Leverage, SchemeName::Length, SchemeName::Uniform],
            ..ExperimentConfig::desk(ExperimentId::BoundRatios)
        };
        let out = run_experiment(&cfg).unwrap();
        let sound = out.values("sound", |_| true);
        let unsound = sound.iter().filter(|s| **s != 1.0).count();
        let defined = |m: &str| out.values(m, |_| true).iter().filter(|v| v.is_finite()).count();
        let (pb, thm) = (median(&out.values("ratio_prop_pb", |_| true)), median(&out.values("ratio_thm_pb", |_| true)));
        ok &= unsound == 0 && thm > pb && defined("ratio_thm_pb") > 0 && defined("ratio_prop_perturbation") > 0;
        parts.push(format!(
            "{kind}: {unsound} unsound of {} trials (applicable: full {}, rank-enforced {}, closed-form {}), median ratios full {:.2}, rank-enforced {pb:.2}, closed-form {thm:.2}",
            sound.len(),
            defined("ratio_prop_perturbation"),
            defined("ratio_prop_pb"),
            defined("ratio_thm_pb"),
            median(&out.values("ratio_prop_perturbation", |_| true)),
        ));
    }
    pass_if(ok, parts.join("; "))
}

fn ratio_trends() -> Outcome {
    let base = ExperimentConfig {
        m: 200,
        n: 200,
        d: 60,
        sigma: 1e-4,
        trials: 40,
        seed: 505,
        schemes: vec![SchemeName::Length],
        ..ExperimentConfig::desk(ExperimentId::RatioVsRank)
    };
    let ks = [2usize, 5, 10, 15, 20];
    let by_rank = run_experiment(&ExperimentConfig { ks: ks.to_vec(), ..base.clone() }).unwrap();
    let med_k: Vec<f64> = ks
        .iter()
        .map(|k| median(&by_rank.values("ratio_thm_pb", |r| r.cell[0] == k.to_string())))
        .collect();
    let kx: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let rho = spearman(&kx, &med_k);
    let sizes = [100usize, 200, 300];
    let by_size = run_experiment(&ExperimentConfig {
        id: ExperimentId::RatioVsSize,
        k: 10,
        sizes: sizes.to_vec(),
        ..base
    })
    .unwrap();
    let med_s: Vec<f64> = sizes
        .iter()
        .map(|s| median(&by_size.values("ratio_thm_pb", |r| r.cell[0] == s.to_string())))
        .collect();
    let hi = med_s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = med_s.iter().copied().fold(f64::INFINITY, f64::min);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ");
    pass_if(
        rho > 0.0 && hi / lo < 3.0,
        format!("medians over k {{2,5,10,15,20}}: [{}], Spearman {rho:.3}; over sizes {{100,200,300}}: [{}], spread {:.2}x", fmt(&med_k), fmt(&med_s), hi / lo),
    )
}

fn sampling_success() -> Outcome {
    let (m, k, trials) = (300, 10, 200u64);
    let d = oversampled_count(k, 3.0);
    let mut rates = Vec::new();
    for (name, scheme, need) in [("length", SchemeName::Length, 0.99), ("uniform", SchemeName::Uniform, 0.95), ("mixed", SchemeName::Mixed, 0.95)] {
        let mut ok = 0;
        for t in 0..trials {
            let mut rng = RngStream::new(606, t);
            let a = gen_lowrank(m, m, k, &mut rng, true).unwrap();
            let rows = SamplingPlan::new(Axis::Rows, scheme.scheme(&a, Axis::Rows, k).unwrap(), d, rng.fork(0)).unwrap();
            let cols = SamplingPlan::new(Axis::Columns, scheme.scheme(&a, Axis::Columns, k).unwrap(), d, rng.fork(1)).unwrap();
            let s = sample_cur(&a, &rows, &cols, MiddleKind::PinvU, None).unwrap();
            ok += usize::from(s.success && s.rank_u == k);
        }
        rates.push((name, ok as f64 / trials as f64, need));
    }
    let detail: Vec<String> = rates.iter().map(|(n, r, need)| format!("{n} {:.1}% (need {:.0}%)", 100.0 * r, 100.0 * need)).collect();
    pass_if(rates.iter().all(|(_, r, need)| r >= need), format!("d = {d}: {}", detail.join(", ")))
}

fn gram_decay() -> Outcome {
    let a = gen_lowrank(100, 60, 8, &mut RngStream::new(707, 0), true).unwrap();
    let p = distribution(&a, Axis::Rows, &SamplingScheme::Length).unwrap();
    let med = |d: usize| {
        let v: Vec<f64> = (0..50u64)
            .map(|t| {
                let plan = SamplingPlan::new(Axis::Rows, SamplingScheme::Length, d, RngStream::new(708, t)).unwrap();
                gram_deviation(&a, &sample(&a, &plan).unwrap(), &p).unwrap()
            })
            .collect();
        median(&v)
    };
    let (m40, m160) = (med(40), med(160));
    pass_if(m160 <= 0.6 * m40, format!("median deviation {m40:.4} at d=40, {m160:.4} at d=160 (ratio {:.3}, need <= 0.6)", m160 / m40))
}

fn rank_estimation() -> Outcome {
    let cfg = ExperimentConfig {
        m: 200,
        n: 200,
        k: 10,
        d: 40,
        sigmas: vec![1e-6, 1e-5, 1e-4, 1e-1],
        trials: 100,
        seed: 808,
        ..ExperimentConfig::desk(ExperimentId::RankNoise)
    };
    let out = run_experiment(&cfg).unwrap();
    let rate = |s: &str| {
        let v = out.values("correct", |r| r.cell[0] == s);
        v.iter().sum::<f64>() / v.len() as f64
    };
    let small: Vec<(String, f64)> = ["1e-6", "1e-5", "1e-4"].iter().map(|s| (s.to_string(), rate(s))).collect();
    let deviating = 1.0 - rate("1e-1");
    let detail: Vec<String> = small.iter().map(|(s, r)| format!("σ={s}: {:.0}% exact", 100.0 * r)).collect();
    pass_if(
        small.iter().all(|(_, r)| *r >= 0.9) && deviating >= 0.9,
        format!("{}; σ=1e-1: {:.0}% deviating", detail.join(", "), 100.0 * deviating),
    )
}

fn micro_suite() -> Outcome {
    let mut violations = [0usize; 6];
    let names = ["Weyl/Mirsky", "Stewart", "Stewart rank change", "pinv bracket", "norm identities", "‖U−Ũ_k‖ ≤ 2‖E_IJ‖"];
    for t in 0..200u64 {
        let mut rng = RngStream::new(909, t);
        let (m, n) = (between(&mut rng, 4, 30), between(&mut rng, 4, 30));
        let b = rng.gaussian_matrix(m, n);
        let e = &rng.gaussian_matrix(m, n) * 10f64.powi(-(between(&mut rng, 2, 6) as i32));
        for kind in [NormKind::Spectral, NormKind::Frobenius] {
            let shift = singular_value_shift(&b, &(&b + &e), kind).unwrap();
            violations[0] += usize::from(shift > norm(&e, kind).unwrap() * (1.0 + 1e-12) + 1e-15);
            let r = stewart_bound(&b, &e, kind).unwrap();
            violations[1] += usize::from(!r.holds(SOUNDNESS_SLACK));
            // Small singular gap keeps the hypothesis of the bracket.
            let small = &e * 1e-3;
            match pinv_norm_bracket(&b, &small, kind) {
                Ok(br) => violations[3] += usize::from(!br.contains_actual(1e-12)),
                Err(CurError::Hypothesis(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
        let k = between(&mut rng, 1, m.min(n) - 1);
        let low = gen_lowrank(m, n, k, &mut rng, true).unwrap();
        let r = stewart_bound(&low, &e, NormKind::Spectral).unwrap();
        let jump_ok = r.holds(SOUNDNESS_SLACK) && r.lower_bound.is_some_and(|lb| r.true_error >= lb * (1.0 - 1e-9));
        violations[2] += usize::from(!jump_ok);

        let (mm, kk) = (between(&mut rng, 20, 60), between(&mut rng, 1, 6));
        let (a, rows, cols) = exact_instance(&mut rng, mm, mm, kk, kk + 2, kk + 3);
        for kind in [NormKind::Spectral, NormKind::Frobenius] {
            let nt = norm_terms(&a, &rows, &cols, kk, kind).unwrap();
            let bad = (nt.cu - nt.w_pinv).abs() > 1e-8 * nt.w_pinv || (nt.ur - nt.v_pinv).abs() > 1e-8 * nt.v_pinv;
            violations[4] += usize::from(bad);
        }
        let noise = gen_noise(mm, mm, 1e-4, &mut rng, None).unwrap();
        let split = NoisySplit::new(a, noise, rows, cols, kk).unwrap();
        let p = split.pieces();
        let utk = best_rank_approx(&p.u_tilde, kk).unwrap();
        for kind in [NormKind::Spectral, NormKind::Frobenius] {
            let gap = norm(&(&p.u - &utk), kind).unwrap();
            violations[5] += usize::from(gap > 2.0 * norm(&p.e_ij, kind).unwrap() * (1.0 + 1e-12));
        }
    }
    let detail: Vec<String> = names.iter().zip(&violations).map(|(n, v)| format!("{n} {v}")).collect();
    pass_if(violations.iter().all(|v| *v == 0), format!("violations over 200 instances: {}", detail.join(", ")))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let exe = env!("CARGO_BIN_EXE_curkit");
    let mut mismatched = Vec::new();
    let runs: [&[&str]; 8] = [
        &["experiment", "1", "--m", "60", "--ks", "2,4", "--trials", "3"],
        &["experiment", "2", "--m", "60", "--ds", "8,12", "--k", "4", "--trials", "3"],
        &["experiment", "3", "--m", "60", "--k", "4", "--d", "12", "--rs", "4,8", "--trials", "3"],
        &["experiment", "4", "--m", "60", "--k", "4", "--d", "16", "--trials", "3"],
        &["experiment", "5", "--m", "60", "--ks", "2,4", "--d", "16", "--trials", "3"],
        &["experiment", "6", "--sizes", "40,60", "--k", "4", "--d", "16", "--trials", "3"],
        &["experiment", "rank-noise", "--m", "60", "--k", "4", "--d", "12", "--trials", "3"],
        &["experiment", "rank-size", "--m", "60", "--k", "4", "--ds", "8,12", "--trials", "3"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("run{i}-{rep}.csv"));
            let status = Command::new(exe)
                .args(*args)
                .args(["--seed", "1010", "--out", out.to_str().unwrap()])
                .status()
                .unwrap();
            assert!(status.success(), "{args:?}");
            let trials = std::fs::read(dir.path().join(format!("run{i}-{rep}.trials.csv"))).unwrap();
            outputs.push((std::fs::read(&out).unwrap(), trials));
        }
        if outputs[0] != outputs[1] {
            mismatched.push(args[1]);
        }
    }
    pass_if(mismatched.is_empty(), format!("{} experiment commands repeated; mismatched: {mismatched:?}", runs.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("exact CUR", exact_cur),
        ("characterization coherence", coherence),
        ("golden 2x2 values", golden),
        ("bound soundness", bound_soundness),
        ("ratio trends", ratio_trends),
        ("sampling success", sampling_success),
        ("Gram-deviation decay", gram_decay),
        ("rank estimation", rank_estimation),
        ("matrix-analysis micro-suite", micro_suite),
        ("determinism", determinism),
    ];
    let (mut passed, mut known, mut failed) = (0, 0, 0);
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let tag = match outcome.verdict {
            Verdict::Pass => {
                passed += 1;
                "PASS".to_string()
            }
            Verdict::Fail => {
                failed += 1;
                "FAIL".to_string()
            }
            Verdict::KnownFail(why) => {
                known += 1;
                format!("FAIL (known: {why})")
            }
        };
        println!("{tag} {:>2} {name} [{secs:.1}s]: {}", i + 1, outcome.detail);
    }
    println!("acceptance: {passed} passed, {} failed ({known} known)", failed + known);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
