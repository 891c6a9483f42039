//! A5 reconstruction accuracy, the gadget corpus and the word-problem
//! reduction demo.

use std::collections::HashSet;

use bcast_a5::group::{product, Elem};
use bcast_a5::pair::PairLabel;
use bcast_a5::quotient::quotient_channel;
use bcast_a5::reconstruct::{model_accuracy, recursive_reconstruct};
use bcast_a5::reduce::{
    amplify_oracle, pair_model_successes, randomize_with, synthetic_oracle, uniform_elem, word_pipeline_successes,
    Promise, WordInstance,
};
use bcast_a5::Model;
use bcast_core::estimators::ks_parameter;
use bcast_core::formula::{random_formula, Formula, FormulaLimits};
use bcast_core::rng::StreamRng;
use bcast_core::stats::binomial_stderr;
use bcast_core::{Rational, SeedSpec};
use bcast_gadgets::{lemma_grid_check, verify_corpus};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::outcome::{point_tag, timed, Check, Outcome};
use crate::row::ResultRow;

fn expect_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.experiment != kind {
        return Err(Error::Config(format!("expected a {kind} config, got {}", cfg.experiment)));
    }
    cfg.validate()
}

#[allow(clippy::too_many_arguments)]
fn rate_row(
    cfg: &ExperimentConfig,
    k: usize,
    label: String,
    d: u32,
    estimator: &str,
    correct: u64,
    trials: u64,
    chance: f64,
) -> ResultRow {
    let acc = correct as f64 / trials as f64;
    ResultRow {
        experiment: cfg.experiment.name().into(),
        k,
        theta_or_channel: label,
        d,
        s: 0.0,
        estimator: estimator.into(),
        trials,
        accuracy: acc,
        stderr: binomial_stderr(acc, trials),
        advantage: acc - chance,
        seed: cfg.seed,
        wall_ms: 0,
    }
}

fn model_label(model: Model, k: usize) -> Result<String> {
    Ok(match model {
        Model::Class16 => format!("class16 ks={:.6}", ks_parameter(&quotient_channel()?, k)?),
        Model::Pair3600 => "pair3600".into(),
    })
}

/// Recursive reconstruction accuracy for every model and `(k, d)`.
pub fn run_a5_accuracy(cfg: &ExperimentConfig) -> Result<Outcome> {
    expect_kind(cfg, ExperimentKind::A5Accuracy)?;
    let tau = cfg.tau()?;
    let mut out = Outcome::default();
    for &model in &cfg.models {
        for &k in &cfg.k {
            for &d in &cfg.d {
                let tag = point_tag(
                    "a5-accuracy",
                    &[("model", model.name().into()), ("k", k.to_string()), ("d", d.to_string())],
                );
                let (acc, ms) =
                    timed(cfg, || model_accuracy(model, k, d, cfg.trials, &tau, &SeedSpec::new(cfg.seed, tag)));
                let acc = acc?;
                let mut row = rate_row(
                    cfg,
                    k,
                    model_label(model, k)?,
                    d,
                    "recursive",
                    acc.correct,
                    acc.trials,
                    1.0 / model.labels() as f64,
                );
                row.wall_ms = ms;
                if let Some(min) = cfg.min_accuracy {
                    out.checks.push(Check::new(
                        format!("a5-accuracy {model} k={k} d={d} at least {min}"),
                        row.accuracy >= min,
                        format!(
                            "{} of {} roots recovered, {} trials with random fallbacks",
                            acc.correct, acc.trials, acc.flagged_trials
                        ),
                    ));
                }
                out.rows.push(row);
            }
        }
    }
    Ok(out)
}

pub fn corpus_limits(cfg: &ExperimentConfig) -> FormulaLimits {
    FormulaLimits { vars: cfg.vars, max_gates: cfg.max_gates, max_depth: cfg.max_depth, use_or: true, use_consts: true }
}

/// The formula corpus a config describes.
pub fn corpus(cfg: &ExperimentConfig, tag: &str) -> Vec<Formula> {
    let mut rng = StreamRng::new(&SeedSpec::new(cfg.seed, tag));
    let lim = corpus_limits(cfg);
    (0..cfg.formulas).map(|_| random_formula(&mut rng, &lim)).collect()
}

/// Compiles a random corpus into leaf templates and checks every
/// assignment; optionally sweeps the one-level bound grid.
pub fn run_gadget_corpus(cfg: &ExperimentConfig) -> Result<Outcome> {
    expect_kind(cfg, ExperimentKind::GadgetCorpus)?;
    let formulas = corpus(cfg, "gadget-corpus");
    let (report, ms) = timed(cfg, || verify_corpus(&formulas, cfg.vars, cfg.max_depth));
    let report = report?;
    let mut out = Outcome::default();
    let tracked = report.checks - report.violations.len() as u64;
    let mut row = rate_row(cfg, 6, "0.9".into(), cfg.max_depth, "gadget-bp", tracked, report.checks, 0.5);
    row.stderr = 0.0;
    row.wall_ms = ms;
    out.rows.push(row);
    let first =
        report.violations.first().map(|v| format!(", first: {} on {:?} gives {:.6}", v.formula, v.inputs, v.posterior));
    out.checks.push(Check::new(
        "gadget posteriors track formulas",
        report.violations.is_empty(),
        format!(
            "{} formulas, {} assignments, {} violations, min true {:.6}, max false {:.6}{}",
            report.formulas,
            report.checks,
            report.violations.len(),
            report.min_true,
            report.max_false,
            first.unwrap_or_default()
        ),
    ));
    if let Some(h) = cfg.grid_step {
        for complement in [false, true] {
            let g = lemma_grid_check(h, complement)?;
            let side = if complement { "complement" } else { "main" };
            out.checks.push(Check::new(
                format!("gadget bound grid ({side}, step {h})"),
                g.pass,
                format!("{} points, {} violations, worst {:?}", g.points, g.violations, g.worst),
            ));
            if !complement {
                let n = (1.0 / h).round() as u64;
                let lo = (19 * n).div_ceil(20) as f64 / n as f64;
                let corner = [lo, lo, lo, lo, 0.0, 0.0];
                out.checks.push(Check::new(
                    format!("gadget bound grid minimizer at {corner:?}"),
                    g.worst == corner,
                    format!(
                        "minimizer {:?}, posterior {}",
                        g.worst,
                        bcast_core::rational::format_rational(&g.worst_posterior)
                    ),
                ));
            }
        }
    }
    Ok(out)
}

/// Every pair `(b1, b2)` gives a distinct randomized two-letter word with
/// the expected product.
pub fn randomization_bijection_r2(word: [Elem; 2]) -> Result<bool> {
    let mut seen = HashSet::new();
    for b1 in Elem::all() {
        for b2 in Elem::all() {
            let w = randomize_with(&word, &[b1, b2])?;
            if product(&w) != product(&word).mul(b2) {
                return Ok(false);
            }
            seen.insert((w[0], w[1]));
        }
    }
    Ok(seen.len() == 3600)
}

/// Fraction of promise instances decided correctly by majority-amplifying a
/// synthetic oracle. Returns `(correct, instances)`.
pub fn amplification_accuracy(r: usize, instances: usize, votes: u64, advantage: f64, seed: u64) -> Result<(u64, u64)> {
    let oracle = synthetic_oracle(advantage);
    let mut rng = StreamRng::new(&SeedSpec::new(seed, "reduction/instances"));
    let amp = SeedSpec::new(seed, "reduction/amplify");
    let mut correct = 0;
    for i in 0..instances {
        let target = loop {
            let g = uniform_elem(&mut rng);
            if !g.is_identity() {
                break g;
            }
        };
        let promise = if i % 2 == 0 { Promise::Identity } else { Promise::Target };
        let inst = WordInstance::random(r, target, promise, &mut rng)?;
        let o = amplify_oracle(&oracle, &inst, votes, &amp.trial(i as u64))?;
        correct += (o.decision == Some(promise)) as u64;
    }
    Ok((correct, instances as u64))
}

/// Pair-model recursive reconstruction as a leaf detector.
pub fn reconstruction_detector(k: usize, tau: Rational) -> impl Fn(&[u16]) -> bcast_core::Result<PairLabel> + Sync {
    move |leaves| {
        let r = recursive_reconstruct(leaves, k, Model::Pair3600, &tau, &SeedSpec::new(0, "detector"))?;
        Ok(PairLabel::from_code(r.root))
    }
}

/// Success of one detector through the product tree of uniform words and on
/// direct pair-model trees: `(word, direct)` success counts.
pub fn detection_comparison(k: usize, d: u32, trials: u64, tau: &Rational, seed: u64) -> Result<(u64, u64)> {
    let det = reconstruction_detector(k, tau.clone());
    let tag = |t: &str| point_tag(t, &[("k", k.to_string()), ("d", d.to_string())]);
    let a = word_pipeline_successes(&det, k, d, trials, &SeedSpec::new(seed, tag("reduction/word")))?;
    let b = pair_model_successes(&det, k, d, trials, &SeedSpec::new(seed, tag("reduction/direct")))?;
    Ok((a, b))
}

/// Randomization, amplification of a weak oracle, and detection through
/// the product tree compared with direct detection.
pub fn run_reduction_demo(cfg: &ExperimentConfig) -> Result<Outcome> {
    expect_kind(cfg, ExperimentKind::ReductionDemo)?;
    let tau = cfg.tau()?;
    let band = cfg.thresholds.stderr_band;
    let mut out = Outcome::default();
    let mut rng = StreamRng::new(&SeedSpec::new(cfg.seed, "reduction/bijection"));
    let word = [uniform_elem(&mut rng), uniform_elem(&mut rng)];
    out.checks.push(Check::new(
        "randomize_word is a bijection at r=2",
        randomization_bijection_r2(word)?,
        format!("word ({}, {})", word[0].index(), word[1].index()),
    ));

    let (res, ms) =
        timed(cfg, || amplification_accuracy(cfg.word_length, cfg.instances, cfg.trials, cfg.advantage, cfg.seed));
    let (correct, n) = res?;
    let label = format!("r={} advantage={}", cfg.word_length, cfg.advantage);
    let mut row = rate_row(cfg, 0, label, 0, "amplify", correct, n, 0.5);
    row.wall_ms = ms;
    if let Some(min) = cfg.min_accuracy {
        out.checks.push(Check::new(
            format!("amplified oracle decides at least {min} of instances"),
            row.accuracy >= min,
            format!("{correct} of {n} instances, {} votes each", cfg.trials),
        ));
    }
    out.rows.push(row);

    for &k in &cfg.k {
        for &d in &cfg.d {
            let n = cfg.detection_trials;
            let (res, ms) = timed(cfg, || detection_comparison(k, d, n, &tau, cfg.seed));
            let (a, b) = res?;
            let chance = 1.0 / 3600.0;
            let mut ra = rate_row(cfg, k, "pair3600".into(), d, "word-pipeline", a, n, chance);
            let mut rb = rate_row(cfg, k, "pair3600".into(), d, "pair-direct", b, n, chance);
            ra.wall_ms = ms;
            rb.wall_ms = ms;
            let se = ra.stderr.hypot(rb.stderr);
            let gap = (ra.accuracy - rb.accuracy).abs();
            out.checks.push(Check::new(
                format!("word pipeline matches direct detection (k={k}, d={d})"),
                gap <= band * se,
                format!("{:.4} vs {:.4}, gap {gap:.4}, band {:.4}", ra.accuracy, rb.accuracy, band * se),
            ));
            out.rows.push(ra);
            out.rows.push(rb);
        }
    }
    Ok(out)
}
