//! Generator equivalence: exact leaf laws on small trees and chi-square
//! comparisons of sampled laws.

use bcast_a5::group::Elem;
use bcast_a5::pair::{generate_pair_model, PairLabel, PAIR_LABELS};
use bcast_a5::product_tree::{product_tree_generate, root_of_word};
use bcast_a5::reduce::uniform_elem;
use bcast_core::gen::{
    exact_law_path_product, exact_law_restrictions, generate_direct, generate_path_product, generate_via_restrictions,
};
use bcast_core::joint::{enumerate_joint, total_variation, EnumerationConfig, JointDistribution};
use bcast_core::rational::to_f64;
use bcast_core::rng::StreamRng;
use bcast_core::stats::{two_sample_chi_square, ChiSquareTest};
use bcast_core::{Channel, LabelArray, Rational, SeedSpec, TreeShape};
use num::{One, Zero};

use crate::config::{decimal, ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::outcome::{point_tag, Check, Outcome};
use crate::row::ResultRow;

pub const GENERATORS: [&str; 3] = ["direct", "path-product", "restrictions"];
const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// `theta` for each generator after applying the config's corruption.
fn generator_thetas(cfg: &ExperimentConfig, theta: f64) -> Result<[Rational; 3]> {
    let base = decimal(theta)?;
    let mut out = [base.clone(), base.clone(), base];
    if let Some(c) = &cfg.corrupt {
        let off = decimal(c.theta_offset)?;
        let i = GENERATORS.iter().position(|g| *g == c.generator).expect("validated generator name");
        let up = &out[i] + &off;
        out[i] = if up <= Rational::one() { up } else { &out[i] - &off };
    }
    Ok(out)
}

pub fn exact_law(which: usize, shape: &TreeShape, theta: &Rational) -> Result<JointDistribution> {
    Ok(match which {
        0 => enumerate_joint(shape, &Channel::binary(theta.clone())?)?,
        1 => exact_law_path_product(shape, theta, EnumerationConfig::default())?,
        _ => exact_law_restrictions(shape, theta, EnumerationConfig::default())?,
    })
}

/// Largest total variation distance between the conditional leaf laws.
pub fn law_distance(a: &JointDistribution, b: &JointDistribution) -> Result<Rational> {
    let mut worst = Rational::zero();
    for root in 0..2 {
        let tv = total_variation(&a.cond[root], &b.cond[root])?;
        if tv > worst {
            worst = tv;
        }
    }
    Ok(worst)
}

fn sample_tree(which: usize, shape: &TreeShape, theta: &Rational, seed: &SeedSpec) -> Result<LabelArray<u8>> {
    Ok(match which {
        0 => generate_direct(shape, &Channel::binary(theta.clone())?, seed, None)?,
        1 => generate_path_product(shape, theta, seed, None)?,
        _ => generate_via_restrictions(shape, theta, seed, None)?,
    })
}

/// Leaves tallied by the chi-square comparison: all of them for small
/// trees, otherwise the first two and the last.
fn tracked_leaves(shape: &TreeShape) -> Vec<usize> {
    if shape.n() <= 10 {
        (0..shape.n()).collect()
    } else {
        vec![0, 1, shape.n() - 1]
    }
}

fn sampled_law(which: usize, shape: &TreeShape, theta: &Rational, samples: u64, seed: &SeedSpec) -> Result<Vec<u64>> {
    let picks = tracked_leaves(shape);
    let mut counts = vec![0u64; 1 << picks.len()];
    for t in 0..samples {
        let tree = sample_tree(which, shape, theta, &seed.trial(t))?;
        let l = tree.leaves();
        let idx = picks.iter().enumerate().fold(0usize, |acc, (b, &i)| acc | (l[i] as usize) << b);
        counts[idx] += 1;
    }
    Ok(counts)
}

fn row(cfg: &ExperimentConfig, k: usize, theta: f64, d: u32, estimator: String, trials: u64, acc: f64) -> ResultRow {
    ResultRow {
        experiment: "equivalence-suite".into(),
        k,
        theta_or_channel: theta.to_string(),
        d,
        s: 0.0,
        estimator,
        trials,
        accuracy: acc,
        stderr: 0.0,
        advantage: 0.0,
        seed: cfg.seed,
        wall_ms: 0,
    }
}

/// Exact checks (TV = 0 between every pair of generators) wherever the
/// enumeration fits, chi-square checks at every grid point, and the
/// product-tree vs pair-model child law. Rows report `1 - TV` for exact
/// checks and the p-value for chi-square checks.
pub fn run_equivalence_suite(cfg: &ExperimentConfig) -> Result<Outcome> {
    if cfg.experiment != ExperimentKind::EquivalenceSuite {
        return Err(Error::Config(format!("expected an equivalence-suite config, got {}", cfg.experiment)));
    }
    cfg.validate()?;
    let mut out = Outcome::default();
    for &k in &cfg.k {
        for &d in &cfg.d {
            let shape = TreeShape::new(k, d)?;
            for &theta in &cfg.theta {
                let thetas = generator_thetas(cfg, theta)?;
                let point = format!("k={k}, d={d}, theta={theta}");
                let laws: Vec<Option<JointDistribution>> = (0..3)
                    .map(|g| match exact_law(g, &shape, &thetas[g]) {
                        Ok(j) => Ok(Some(j)),
                        Err(Error::Core(bcast_core::Error::EnumerationCap { .. })) => Ok(None),
                        Err(e) => Err(e),
                    })
                    .collect::<Result<_>>()?;
                for (a, b) in PAIRS {
                    let pair = format!("{}~{}", GENERATORS[a], GENERATORS[b]);
                    if let (Some(la), Some(lb)) = (&laws[a], &laws[b]) {
                        let tv = law_distance(la, lb)?;
                        out.checks.push(Check::new(
                            format!("exact {pair} ({point})"),
                            tv.is_zero(),
                            format!("TV = {tv}"),
                        ));
                        out.rows.push(row(cfg, k, theta, d, format!("{pair}:exact"), 0, 1.0 - to_f64(&tv)));
                    }
                }
                let tag = |g: usize| {
                    point_tag(
                        "equivalence",
                        &[
                            ("gen", GENERATORS[g].into()),
                            ("k", k.to_string()),
                            ("d", d.to_string()),
                            ("theta", theta.to_string()),
                        ],
                    )
                };
                let laws = (0..3)
                    .map(|g| sampled_law(g, &shape, &thetas[g], cfg.trials, &SeedSpec::new(cfg.seed, tag(g))))
                    .collect::<Result<Vec<_>>>()?;
                for (a, b) in PAIRS {
                    let pair = format!("{}~{}", GENERATORS[a], GENERATORS[b]);
                    let t = two_sample_chi_square(&laws[a], &laws[b], cfg.thresholds.alpha)?;
                    out.checks.push(Check::new(
                        format!("chi-square {pair} ({point})"),
                        !t.rejects(),
                        format!("chi2 = {:.3}, df = {}, p = {:.4}", t.statistic, t.df, t.p_value),
                    ));
                    out.rows.push(row(cfg, k, theta, d, format!("{pair}:chi-square"), cfg.trials, t.p_value));
                }
            }
        }
    }
    let pc = pair_child_law_check(cfg.trials, cfg.seed, cfg.thresholds.alpha)?;
    out.checks.push(Check::new(
        "chi-square pair-model~product-tree child law (d=1)",
        !pc.test.rejects(),
        format!(
            "chi2 = {:.3}, df = {}, p = {:.4}, {} samples",
            pc.test.statistic, pc.test.df, pc.test.p_value, pc.samples
        ),
    ));
    out.checks.push(Check::new(
        "product-tree edges stay in parent pairs",
        pc.invariant_violations == 0,
        format!("{} violations over {} edges", pc.invariant_violations, pc.edges),
    ));
    out.rows.push(ResultRow {
        experiment: "equivalence-suite".into(),
        k: PAIR_CHECK_ARITY,
        theta_or_channel: "pair3600".into(),
        d: 1,
        s: 0.0,
        estimator: "pair-model~product-tree:chi-square".into(),
        trials: pc.samples,
        accuracy: pc.test.p_value,
        stderr: 0.0,
        advantage: 0.0,
        seed: cfg.seed,
        wall_ms: 0,
    });
    Ok(out)
}

/// Children per tree in [`pair_child_law_check`].
pub const PAIR_CHECK_ARITY: usize = 10;

#[derive(Debug, Clone)]
pub struct PairChildLaw {
    pub test: ChiSquareTest,
    pub samples: u64,
    pub edges: u64,
    pub invariant_violations: u64,
}

/// Child labels of a fixed root from the product tree of a random
/// four-letter word against direct pair-model children of the same root,
/// `samples` children each. Every product-tree edge is also checked to
/// carry a child whose product is one of the parent's entries.
pub fn pair_child_law_check(samples: u64, seed: u64, alpha: f64) -> Result<PairChildLaw> {
    let k = PAIR_CHECK_ARITY;
    let mut rng = StreamRng::new(&SeedSpec::new(seed, "equivalence/sigma"));
    let sigma: Vec<Elem> = (0..4).map(|_| uniform_elem(&mut rng)).collect();
    let root = root_of_word(&sigma);
    let shape = TreeShape::new(k, 1)?;
    let trees = samples.div_ceil(k as u64);
    let (mut pt, mut direct) = (vec![0u64; PAIR_LABELS], vec![0u64; PAIR_LABELS]);
    let mut violations = 0;
    let pt_seed = SeedSpec::new(seed, "equivalence/product-tree");
    let pair_seed = SeedSpec::new(seed, "equivalence/pair");
    for t in 0..trees {
        let a = product_tree_generate(1, &sigma, k, &pt_seed.trial(t))?;
        let b = generate_pair_model(&shape, &pair_seed.trial(t), Some(root))?;
        let parent = PairLabel::from_code(a.root());
        for (&x, &y) in a.leaves().iter().zip(b.leaves()) {
            pt[x as usize] += 1;
            direct[y as usize] += 1;
            let p = PairLabel::from_code(x).product();
            violations += (p != parent.first && p != parent.second) as u64;
        }
    }
    Ok(PairChildLaw {
        test: two_sample_chi_square(&pt, &direct, alpha)?,
        samples: trees * k as u64,
        edges: trees * k as u64,
        invariant_violations: violations,
    })
}
