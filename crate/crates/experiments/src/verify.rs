//! Acceptance criteria.
//!
//! Each criterion is a function of a [`Scale`]. `Full` runs the pinned
//! sample sizes and enforces the runtime budget; `Quick` shrinks the Monte
//! Carlo work for smoke runs and keeps every threshold.

use std::time::{Duration, Instant};

use bcast_a5::barrington::barrington_compile;
use bcast_a5::group::{class_tally, product, verify_group_axioms, Class, Elem};
use bcast_a5::pair::PairLabel;
use bcast_a5::product_tree::product_tree_generate;
use bcast_a5::quotient::{lumpability_check, quotient_channel, square_has_identical_columns};
use bcast_a5::reconstruct::{default_tau, model_accuracy};
use bcast_a5::reduce::uniform_elem;
use bcast_a5::Model;
use bcast_core::bp::{bp_posterior, LeafLikelihood, Mode};
use bcast_core::estimators::{estimate_p_sd_mc, ks_parameter, majority_from_count};
use bcast_core::formula::{assignments, random_formula, FormulaLimits};
use bcast_core::gen::{
    approx_threshold, biased_bit_approx_from_bits, biased_bit_from_bits, generate_direct, sample_leaf_count,
};
use bcast_core::joint::enumerate_joint;
use bcast_core::labels::config_from_index;
use bcast_core::rational::{int, rat, Dyadic};
use bcast_core::rng::StreamRng;
use bcast_core::stats::binomial_stderr;
use bcast_core::{Channel, LabelArray, Rational, SeedSpec, TreeShape};
use num::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{EstimatorKind, ExperimentConfig, ExperimentKind};
use crate::demos::{amplification_accuracy, detection_comparison, randomization_bijection_r2};
use crate::equivalence::{exact_law, law_distance, pair_child_law_check, GENERATORS};
use crate::error::Result;
use crate::outcome::Outcome;
use crate::row::{render, ResultRow};
use crate::run::{run_experiment, with_jobs};

/// Master seed of every criterion.
pub const ACCEPTANCE_SEED: u64 = 20_240_601;

const BAND: f64 = 3.0;
const ALPHA: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Full,
    Quick,
}

impl Scale {
    fn pick<T>(self, full: T, quick: T) -> T {
        match self {
            Scale::Full => full,
            Scale::Quick => quick,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed_ms: u64,
    pub budget_ms: Option<u64>,
}

impl CriterionResult {
    /// `PASS [n] name (12.3 s): detail`
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {} ({:.1} s): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_ms as f64 / 1000.0,
            self.detail
        )
    }
}

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }

    /// All `parts` must pass; details are joined.
    fn all(parts: Vec<Verdict>) -> Self {
        let pass = parts.iter().all(|p| p.pass);
        let detail = parts
            .iter()
            .map(|p| if p.pass { p.detail.clone() } else { format!("FAILED {}", p.detail) })
            .collect::<Vec<_>>()
            .join("; ");
        Verdict { pass, detail }
    }
}

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub budget: Option<Duration>,
    run: fn(Scale) -> Result<Verdict>,
}

const fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

pub static CRITERIA: [Criterion; 15] = [
    Criterion { id: 1, name: "BP equals the enumeration posterior", budget: secs(5), run: c1_bp_exact },
    Criterion { id: 2, name: "generator leaf laws coincide exactly", budget: secs(5), run: c2_generators_exact },
    Criterion { id: 3, name: "pairwise correlation and mean laws", budget: secs(30), run: c3_correlation_and_mean },
    Criterion { id: 4, name: "majority deviation bound", budget: secs(60), run: c4_deviation },
    Criterion { id: 5, name: "majority across the KS threshold", budget: secs(300), run: c5_ks_phase },
    Criterion { id: 6, name: "LinearizedBP near full BP", budget: secs(600), run: c6_linearized },
    Criterion { id: 7, name: "P_{s,d} structure", budget: secs(60), run: c7_psd },
    Criterion { id: 8, name: "A5 algebra and the class-pair channel", budget: secs(10), run: c8_algebra },
    Criterion { id: 9, name: "product tree vs pair model child law", budget: secs(120), run: c9_product_tree },
    Criterion { id: 10, name: "class16 recursive reconstruction", budget: secs(600), run: c10_reconstruction },
    Criterion { id: 11, name: "word-problem reductions", budget: secs(300), run: c11_reductions },
    Criterion { id: 12, name: "Barrington compilation", budget: secs(60), run: c12_barrington },
    Criterion { id: 13, name: "gadget compilation", budget: secs(600), run: c13_gadgets },
    Criterion { id: 14, name: "biased-bit samplers", budget: secs(5), run: c14_samplers },
    Criterion { id: 15, name: "reproducibility across worker counts", budget: None, run: c15_reproducibility },
];

pub fn criterion(id: u32) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id == id)
}

/// Runs one criterion. Errors count as failures; at full scale so does
/// exceeding the runtime budget.
pub fn run_criterion(c: &Criterion, scale: Scale) -> CriterionResult {
    let start = Instant::now();
    let v = (c.run)(scale).unwrap_or_else(|e| Verdict::new(false, format!("error: {e}")));
    let elapsed = start.elapsed();
    let mut pass = v.pass;
    let mut detail = v.detail;
    if let (Scale::Full, Some(b)) = (scale, c.budget) {
        if elapsed > b {
            pass = false;
            detail = format!("{detail}; over budget: {:.1} s > {} s", elapsed.as_secs_f64(), b.as_secs());
        }
    }
    CriterionResult {
        id: c.id,
        name: c.name,
        pass,
        detail,
        elapsed_ms: elapsed.as_millis() as u64,
        budget_ms: c.budget.map(|b| b.as_millis() as u64),
    }
}

pub fn run_all(scale: Scale, only: &[u32]) -> Vec<CriterionResult> {
    CRITERIA.iter().filter(|c| only.is_empty() || only.contains(&c.id)).map(|c| run_criterion(c, scale)).collect()
}

fn seed(tag: &str) -> SeedSpec {
    SeedSpec::new(ACCEPTANCE_SEED, tag)
}

fn c1_bp_exact(_: Scale) -> Result<Verdict> {
    let mut checked = 0u64;
    let mut bad = Vec::new();
    for (k, d) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)] {
        let shape = TreeShape::new(k, d)?;
        for theta in [rat(1, 4), rat(1, 2), rat(3, 4)] {
            let ch = Channel::binary(theta.clone())?;
            let j = enumerate_joint(&shape, &ch)?;
            for x in 0..j.configs() {
                let leaves = config_from_index(x, 2, shape.n());
                let r = bp_posterior(&shape, &ch, &LeafLikelihood::observed(&leaves, 2)?, Mode::Rational)?;
                checked += 1;
                if r.exact.as_ref() != Some(&j.posterior(x)?) {
                    bad.push(format!("k={k} d={d} theta={theta} x={x}"));
                }
            }
        }
    }
    Ok(Verdict::new(bad.is_empty(), format!("{checked} leaf configurations, {} mismatches {bad:?}", bad.len())))
}

fn c2_generators_exact(_: Scale) -> Result<Verdict> {
    let shape = TreeShape::new(2, 2)?;
    let mut parts = Vec::new();
    for theta in [int(0), rat(1, 4), rat(1, 2), rat(3, 4), int(1)] {
        let laws = (0..3).map(|g| exact_law(g, &shape, &theta)).collect::<Result<Vec<_>>>()?;
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let tv = law_distance(&laws[a], &laws[b])?;
            if !tv.is_zero() {
                parts.push(format!("{}~{} at theta={theta}: TV = {tv}", GENERATORS[a], GENERATORS[b]));
            }
        }
    }
    Ok(Verdict::new(
        parts.is_empty(),
        if parts.is_empty() { "TV = 0 for all 15 comparisons".into() } else { parts.join(", ") },
    ))
}

/// Leaf `j` whose lowest common ancestor with leaf 0 is `r` levels up.
fn partner_at(k: usize, r: u32) -> usize {
    k.pow(r - 1)
}

fn c3_correlation_and_mean(scale: Scale) -> Result<Verdict> {
    let mut parts = Vec::new();
    // exact, from the enumeration oracle
    let mut exact_bad = Vec::new();
    for (k, d) in [(2, 3), (3, 2)] {
        let shape = TreeShape::new(k, d)?;
        let n = shape.n();
        for theta in [rat(1, 2), rat(4, 5)] {
            let j = enumerate_joint(&shape, &Channel::binary(theta.clone())?)?;
            let mix = j.mixture();
            for r in 1..=d {
                let b = partner_at(k, r);
                let same: Rational = (0..j.configs())
                    .filter(|&x| {
                        let l = config_from_index(x, 2, n);
                        l[0] == l[b]
                    })
                    .map(|x| mix[x].clone())
                    .sum();
                let want = (int(1) + num::pow(theta.clone(), 2 * r as usize)) / int(2);
                if same != want {
                    exact_bad.push(format!("pair law k={k} d={d} theta={theta} r={r}: {same} != {want}"));
                }
            }
            let mean: Rational = (0..j.configs())
                .map(|x| {
                    let ones = config_from_index(x, 2, n).iter().filter(|&&v| v == 1).count() as i64;
                    &j.cond[1][x] * int(ones)
                })
                .sum();
            let want = int(n as i64) / int(2) * (int(1) + num::pow(theta.clone(), d as usize));
            if mean != want {
                exact_bad.push(format!("mean k={k} d={d} theta={theta}: {mean} != {want}"));
            }
        }
    }
    parts.push(Verdict::new(
        exact_bad.is_empty(),
        if exact_bad.is_empty() { "exact laws hold on k=2 d=3 and k=3 d=2".into() } else { exact_bad.join(", ") },
    ));

    // Monte Carlo at k=3, d=6, theta=0.8 with root 1
    let (k, d, theta) = (3usize, 6u32, 0.8f64);
    let shape = TreeShape::new(k, d)?;
    let trials: u64 = scale.pick(100_000, 10_000);
    let ch = Channel::binary(rat(4, 5))?;
    let s = seed("c3");
    let (sum, sum_sq, agree) = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(u64, u128, [u64; 6])> {
            let tree: LabelArray<u8> = generate_direct(&shape, &ch, &s.trial(t), Some(1))?;
            let l = tree.leaves();
            let ones = l.iter().filter(|&&v| v == 1).count() as u64;
            let mut agree = [0u64; 6];
            for r in 1..=d {
                agree[r as usize - 1] = (l[0] == l[partner_at(k, r)]) as u64;
            }
            Ok((ones, (ones as u128) * (ones as u128), agree))
        })
        .try_reduce(
            || (0, 0, [0; 6]),
            |a, b| {
                let mut g = a.2;
                for (x, y) in g.iter_mut().zip(b.2) {
                    *x += y;
                }
                Ok((a.0 + b.0, a.1 + b.1, g))
            },
        )?;
    let n = trials as f64;
    let mean = sum as f64 / n;
    let var = (sum_sq as f64 / n - mean * mean) * n / (n - 1.0);
    let se = (var / n).sqrt();
    let leaves = shape.n() as f64;
    let want = leaves / 2.0 + leaves * theta.powi(d as i32) / 2.0;
    parts.push(Verdict::new(
        (mean - want).abs() <= BAND * se,
        format!("mean {mean:.3} vs {want:.3} (stderr {se:.3}, {trials} trees)"),
    ));
    let mut pair_bad = Vec::new();
    for r in 1..=d {
        let p = agree[r as usize - 1] as f64 / n;
        let want = 0.5 + theta.powi(2 * r as i32) / 2.0;
        let se = binomial_stderr(p, trials);
        if (p - want).abs() > BAND * se {
            pair_bad.push(format!("r={r}: {p:.4} vs {want:.4} (stderr {se:.4})"));
        }
    }
    parts.push(Verdict::new(
        pair_bad.is_empty(),
        if pair_bad.is_empty() { "pair agreement within 3 stderr for r=1..6".into() } else { pair_bad.join(", ") },
    ));
    Ok(Verdict::all(parts))
}

fn c4_deviation(scale: Scale) -> Result<Verdict> {
    let (k, theta, d) = (10usize, 0.6f64, 6u32);
    let shape = TreeShape::new(k, d)?;
    let trials: u64 = scale.pick(10_000, 2_000);
    let s = seed("c4");
    let wrong = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> {
            let mut rng = StreamRng::new(&s.trial(t));
            let ones = sample_leaf_count(&shape, theta, 1, &mut rng)?;
            let tie = rng.next_u64() & 1 == 1;
            Ok((majority_from_count(ones, shape.n() as u64, tie) != 1) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let p = wrong as f64 / trials as f64;
    let se = binomial_stderr(p, trials);
    let bound = 1.0 / (k as f64 * theta * theta - 1.0);
    Ok(Verdict::new(
        p <= bound + BAND * se,
        format!("misclassification {p:.4} (stderr {se:.4}, {trials} trials) vs bound {bound:.4}"),
    ))
}

fn scan_rows(out: &Outcome, theta: &str, d: u32, estimator: &str) -> Option<ResultRow> {
    out.rows
        .iter()
        .find(|r| r.theta_or_channel.split(' ').next() == Some(theta) && r.d == d && r.estimator == estimator)
        .cloned()
}

fn c5_ks_phase(scale: Scale) -> Result<Verdict> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::KsScan, ACCEPTANCE_SEED);
    cfg.k = vec![2];
    cfg.theta = vec![0.5, 0.8];
    cfg.d = vec![4, 6, 8, 10];
    cfg.trials = scale.pick(10_000, 2_000);
    cfg.estimators = vec![EstimatorKind::Majority];
    let out = run_experiment(&cfg)?;
    let adv = |theta: &str, d: u32| scan_rows(&out, theta, d, "majority").map(|r| r.advantage).unwrap_or(f64::NAN);
    let low: Vec<String> = cfg.d.iter().map(|&d| format!("{:.4}", adv("0.5", d))).collect();
    let high: Vec<String> = cfg.d.iter().map(|&d| format!("{:.4}", adv("0.8", d))).collect();
    let below = adv("0.5", 10) < 0.02;
    let above = cfg.d.iter().all(|&d| adv("0.8", d) >= 0.05);
    Ok(Verdict::all(vec![
        Verdict::new(below, format!("theta=0.5 advantage by d=4,6,8,10: {}", low.join(", "))),
        Verdict::new(above, format!("theta=0.8: {}", high.join(", "))),
    ]))
}

fn c6_linearized(scale: Scale) -> Result<Verdict> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::KsScan, ACCEPTANCE_SEED);
    cfg.k = vec![15];
    cfg.theta = vec![0.7];
    cfg.d = vec![4];
    cfg.trials = scale.pick(10_000, 1_000);
    let out = run_experiment(&cfg)?;
    let acc = |e: &str| scan_rows(&out, "0.7", 4, e).map(|r| r.accuracy).unwrap_or(f64::NAN);
    let (lin, bp, maj) = (acc("linearized-bp"), acc("bp"), acc("majority"));
    Ok(Verdict::all(vec![
        Verdict::new((lin - bp).abs() <= 0.02, format!("linearized {lin:.4} vs bp {bp:.4}")),
        Verdict::new(lin >= maj - 0.01, format!("majority {maj:.4}")),
    ]))
}

fn c7_psd(scale: Scale) -> Result<Verdict> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::NoiseScan, ACCEPTANCE_SEED);
    cfg.k = vec![2];
    cfg.theta = vec![0.9];
    cfg.d = vec![1, 2, 3];
    cfg.s = vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
    let out = run_experiment(&cfg)?;
    let mut parts = Vec::new();
    for c in out.checks.iter().filter(|c| c.name.contains("nonincreasing")) {
        parts.push(Verdict::new(c.pass, format!("{}: {}", c.name.trim_start_matches("noise-scan "), c.detail)));
    }
    let trials: u64 = scale.pick(20_000, 4_000);
    let mut mc_bad = Vec::new();
    for r in &out.rows {
        let shape = TreeShape::new(r.k, r.d)?;
        let mc = estimate_p_sd_mc(&shape, 0.9, r.s, trials, &seed(&format!("c7/d={}/s={}", r.d, r.s)))?;
        if (mc.accuracy - r.accuracy).abs() > BAND * mc.stderr {
            mc_bad.push(format!(
                "d={} s={}: {:.4} vs exact {:.4} (stderr {:.4})",
                r.d, r.s, mc.accuracy, r.accuracy, mc.stderr
            ));
        }
    }
    parts.push(Verdict::new(
        mc_bad.is_empty() && out.rows.len() == 18,
        if mc_bad.is_empty() {
            format!("Monte Carlo within 3 stderr at all {} points", out.rows.len())
        } else {
            mc_bad.join(", ")
        },
    ));
    Ok(Verdict::all(parts))
}

fn c8_algebra(_: Scale) -> Result<Verdict> {
    let axioms = verify_group_axioms();
    let tally = class_tally();
    let lump = lumpability_check().map(|_| ());
    let ch = quotient_channel()?;
    let stochastic = (0..ch.m()).all(|j| ch.column(j).iter().sum::<Rational>() == Rational::one());
    let square = square_has_identical_columns(&ch)?;
    let ks: Vec<f64> =
        [1usize, 2, 6, 60, 6000, 60000].iter().map(|&k| ks_parameter(&ch, k)).collect::<bcast_core::Result<_>>()?;
    Ok(Verdict::all(vec![
        Verdict::new(axioms.is_ok(), format!("group axioms {}", axioms.err().unwrap_or_else(|| "hold".into()))),
        Verdict::new(tally == [1, 15, 20, 24], format!("class sizes {tally:?}")),
        Verdict::new(
            lump.is_ok(),
            format!("lumpability {}", lump.err().map(|e| e.to_string()).unwrap_or("exact".into())),
        ),
        Verdict::new(stochastic, "M' column-stochastic"),
        Verdict::new(square, "M'^2 columns identical"),
        Verdict::new(ks.iter().all(|&v| v == 0.0), format!("ks_parameter(M', k) = {ks:?}")),
    ]))
}

fn c9_product_tree(scale: Scale) -> Result<Verdict> {
    let samples: u64 = scale.pick(1_000_000, 100_000);
    let pc = pair_child_law_check(samples, ACCEPTANCE_SEED, ALPHA)?;
    // deeper trees: every edge's child product is one of the parent's entries
    let mut edges = 0u64;
    let mut bad = 0u64;
    let mut rng = StreamRng::new(&seed("c9/words"));
    for t in 0..scale.pick(200, 20) {
        let d = 3;
        let sigma: Vec<Elem> = (0..1 << (d + 1)).map(|_| uniform_elem(&mut rng)).collect();
        let tree = product_tree_generate(d, &sigma, 5, &seed("c9/trees").trial(t))?;
        for level in 1..=d {
            for (i, &c) in tree.level(level).iter().enumerate() {
                let p = PairLabel::from_code(tree.level(level - 1)[i / 5]);
                let q = PairLabel::from_code(c).product();
                edges += 1;
                bad += (q != p.first && q != p.second) as u64;
            }
        }
        if PairLabel::from_code(tree.root()).product() != product(&sigma) {
            bad += 1;
        }
    }
    Ok(Verdict::all(vec![
        Verdict::new(
            !pc.test.rejects(),
            format!(
                "chi2 = {:.2}, df = {}, p = {:.4} over {} children",
                pc.test.statistic, pc.test.df, pc.test.p_value, pc.samples
            ),
        ),
        Verdict::new(
            pc.invariant_violations == 0 && bad == 0,
            format!("product invariant on {} edges, {} violations", pc.edges + edges, pc.invariant_violations + bad),
        ),
    ]))
}

fn c10_reconstruction(scale: Scale) -> Result<Verdict> {
    let (k, d) = (6000, 2);
    let trials: u64 = scale.pick(200, 20);
    let acc = model_accuracy(Model::Class16, k, d, trials, &default_tau(), &seed("c10"))?;
    let p = acc.correct as f64 / trials as f64;
    Ok(Verdict::new(
        p >= 0.9,
        format!(
            "accuracy {p:.3} ({} of {trials}) at k={k}, d={d}; {} trials used a random fallback",
            acc.correct, acc.flagged_trials
        ),
    ))
}

fn c11_reductions(scale: Scale) -> Result<Verdict> {
    let mut rng = StreamRng::new(&seed("c11/word"));
    let word = [uniform_elem(&mut rng), uniform_elem(&mut rng)];
    let bij = randomization_bijection_r2(word)?;
    let (correct, n) = amplification_accuracy(64, 200, scale.pick(500, 200), 0.1, ACCEPTANCE_SEED)?;
    let amp = correct as f64 / n as f64;
    let trials: u64 = scale.pick(2_000, 400);
    let (k, d) = (12, 2);
    let (a, b) = detection_comparison(k, d, trials, &default_tau(), ACCEPTANCE_SEED)?;
    let (pa, pb) = (a as f64 / trials as f64, b as f64 / trials as f64);
    let se = binomial_stderr(pa, trials).hypot(binomial_stderr(pb, trials));
    Ok(Verdict::all(vec![
        Verdict::new(bij, "r=2 randomization is a bijection onto 3600 words"),
        Verdict::new(amp >= 0.99, format!("amplified synthetic oracle decides {correct} of {n} instances")),
        Verdict::new(
            (pa - pb).abs() <= BAND * se,
            format!("detection through words {pa:.4} vs direct {pb:.4} (combined stderr {se:.4}, k={k}, d={d})"),
        ),
    ]))
}

fn c12_barrington(scale: Scale) -> Result<Verdict> {
    let lim = FormulaLimits { vars: 10, max_gates: 32, max_depth: 8, use_or: true, use_consts: true };
    let mut rng = StreamRng::new(&seed("c12"));
    let targets: Vec<Elem> = Elem::all().filter(|g| g.class() == Class::FiveCycle).collect();
    let count = scale.pick(100, 20);
    let mut checks = 0u64;
    let mut bad = Vec::new();
    let mut longest = 0;
    for i in 0..count {
        let f = random_formula(&mut rng, &lim);
        let tau = targets[i % targets.len()];
        let prog = barrington_compile(&f, tau)?;
        longest = longest.max(prog.len());
        for a in assignments(lim.vars) {
            let want = if f.eval(&a)? { tau } else { Elem::IDENTITY };
            checks += 1;
            if prog.evaluate(&a)? != want {
                bad.push(format!("{f} on {a:?}"));
                break;
            }
        }
    }
    Ok(Verdict::new(
        bad.is_empty(),
        format!("{count} formulas, {checks} evaluations, longest program {longest}, mismatches {bad:?}"),
    ))
}

fn c13_gadgets(scale: Scale) -> Result<Verdict> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::GadgetCorpus, ACCEPTANCE_SEED);
    cfg.formulas = scale.pick(100, 10);
    cfg.vars = 8;
    cfg.max_gates = 31;
    cfg.max_depth = 5;
    cfg.grid_step = Some(0.01);
    let out = run_experiment(&cfg)?;
    Ok(Verdict::all(out.checks.iter().map(|c| Verdict::new(c.pass, format!("{}: {}", c.name, c.detail))).collect()))
}

fn c14_samplers(_: Scale) -> Result<Verdict> {
    let mut bad = Vec::new();
    let mut dyadics = [int(0), rat(1, 2), rat(3, 4), rat(5, 8)]
        .iter()
        .map(|t| Ok(Dyadic::try_from(t)?))
        .collect::<Result<Vec<_>>>()?;
    // 3/4 also as 6/8: sixteen four-bit inputs, fourteen ones
    dyadics.push(Dyadic::new(6, 3)?);
    for d in dyadics {
        let theta = d.to_rational();
        let total = 1u64 << (d.exp + 1);
        let ones = (0..total).filter(|&b| biased_bit_from_bits(d, b)).count() as i64;
        if rat(ones, total as i64) != (int(1) + &theta) / int(2) {
            bad.push(format!("exact sampler at theta={theta}: {ones}/{total}"));
        }
    }
    let mut cases = 0;
    for theta in [int(0), int(1), rat(1, 3), rat(-2, 7), rat(5, 8), rat(99, 100), rat(1, 7), rat(-1, 1)] {
        for t in 1..=12u32 {
            let th = approx_threshold(&theta, t)?;
            let ones = (0..1u64 << t).filter(|&b| biased_bit_approx_from_bits(th, t, b)).count() as i64;
            let err = num::abs(rat(ones, 1 << t) - (int(1) + &theta) / int(2));
            cases += 1;
            if err > rat(1, 1 << t) {
                bad.push(format!("approximate sampler at theta={theta}, t={t}: error {err}"));
            }
        }
    }
    Ok(Verdict::new(
        bad.is_empty(),
        if bad.is_empty() {
            format!("exact sampler exact at 5 dyadic encodings; approximate error <= 2^-t in {cases} cases")
        } else {
            bad.join(", ")
        },
    ))
}

/// Small configs of every experiment kind.
pub fn reproducibility_configs() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    let mut ks = ExperimentConfig::new(ExperimentKind::KsScan, ACCEPTANCE_SEED);
    ks.k = vec![2, 3];
    ks.theta = vec![0.0, 0.6, 1.0];
    ks.d = vec![3, 5];
    ks.trials = 300;
    out.push(ks);
    let mut noise = ExperimentConfig::new(ExperimentKind::NoiseScan, ACCEPTANCE_SEED);
    noise.k = vec![2];
    noise.theta = vec![0.8];
    noise.d = vec![2, 5];
    noise.s = vec![0.0, 0.25, 0.5];
    noise.trials = 300;
    noise.format = crate::config::OutputFormat::Json;
    out.push(noise);
    let mut a5 = ExperimentConfig::new(ExperimentKind::A5Accuracy, ACCEPTANCE_SEED);
    a5.models = vec![Model::Class16, Model::Pair3600];
    a5.k = vec![60];
    a5.d = vec![1];
    a5.trials = 100;
    out.push(a5);
    let mut eq = ExperimentConfig::new(ExperimentKind::EquivalenceSuite, ACCEPTANCE_SEED);
    eq.k = vec![2];
    eq.d = vec![2];
    eq.theta = vec![0.5];
    eq.trials = 2000;
    out.push(eq);
    let mut gad = ExperimentConfig::new(ExperimentKind::GadgetCorpus, ACCEPTANCE_SEED);
    gad.formulas = 4;
    gad.vars = 4;
    gad.max_depth = 3;
    out.push(gad);
    let mut red = ExperimentConfig::new(ExperimentKind::ReductionDemo, ACCEPTANCE_SEED);
    red.k = vec![12];
    red.d = vec![1];
    red.instances = 6;
    red.word_length = 16;
    red.trials = 100;
    red.detection_trials = 200;
    out.push(red);
    out
}

fn c15_reproducibility(_: Scale) -> Result<Verdict> {
    let mut parts = Vec::new();
    for cfg in reproducibility_configs() {
        let once = |jobs: usize| -> Result<Vec<u8>> {
            let c = cfg.clone();
            with_jobs(jobs, move || render(&run_experiment(&c)?.rows, c.format))?
        };
        let a = once(1)?;
        let b = once(4)?;
        let c = once(1)?;
        parts.push(Verdict::new(a == b && a == c, format!("{} ({} bytes)", cfg.experiment, a.len())));
    }
    Ok(Verdict::all(parts))
}
