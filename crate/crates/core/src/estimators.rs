//! Root estimators and Monte Carlo accuracy estimation.

use nalgebra::DMatrix;
use num::{BigRational, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bp::{binary_log_odds, decide};
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::gen::{add_leaf_noise, generate_direct, sample_leaf_count, NoiseSpec};
use crate::joint::{bayes_accuracy, config_count, enumerate_joint_with, EnumerationConfig};
use crate::labels::LabelArray;
use crate::rational::{from_f64, int, to_f64};
use crate::rng::{NodeRng, SeedSpec, StreamRng};
use crate::tree::{NodeAddr, TreeShape};

/// Majority of a 0/1 count with an explicit tie bit.
#[inline]
pub fn majority_from_count(ones: u64, total: u64, tie_bit: bool) -> u8 {
    match (2 * ones).cmp(&total) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => 0,
        std::cmp::Ordering::Equal => tie_bit as u8,
    }
}

/// Leaf majority; an exact tie is broken by a bit drawn from `seed`.
pub fn majority_estimate(leaves: &[u8], seed: &SeedSpec) -> u8 {
    let ones = leaves.iter().filter(|&&x| x == 1).count() as u64;
    let tie = NodeRng::new(seed).word(NodeAddr::ROOT) & 1 == 1;
    majority_from_count(ones, leaves.len() as u64, tie)
}

/// Depth of the reduced tree: the largest `j` with `k^j <= log2(k^d)`, i.e.
/// `2^(k^j) <= n`, computed in integers. Zero when no level qualifies.
pub fn reduced_depth(shape: &TreeShape) -> u32 {
    if shape.k() == 1 {
        return 0;
    }
    let log_n = shape.n().ilog2() as u64;
    let k = shape.k() as u64;
    let mut j = 0;
    let mut kj = k; // k^(j+1)
    while kj <= log_n && j < shape.d() {
        j += 1;
        kj = kj.saturating_mul(k);
    }
    j
}

/// How the reduced-tree decoder learns the majority flip rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlipRate {
    /// A caller-provided rate.
    Supplied(f64),
    /// Monte Carlo estimate over the given number of subtrees.
    Estimated { trials: u64 },
    /// The analytic bound `1 / (k theta^2 - 1)`; needs `k theta^2 > 2`.
    LemmaBound,
    /// Exact probability from the leaf-count distribution.
    Exact,
}

impl FlipRate {
    pub fn name(&self) -> String {
        match self {
            FlipRate::Supplied(s) => format!("supplied:{s}"),
            FlipRate::Estimated { trials } => format!("estimated:{trials}"),
            FlipRate::LemmaBound => "lemma-bound".into(),
            FlipRate::Exact => "exact".into(),
        }
    }
}

impl std::str::FromStr for FlipRate {
    type Err = Error;

    /// `exact`, `lemma-bound`, `estimated:<trials>` or a number.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(FlipRate::Exact),
            "lemma-bound" | "bound" => Ok(FlipRate::LemmaBound),
            _ => {
                if let Some(t) = s.strip_prefix("estimated:") {
                    let trials = t.parse().map_err(|_| Error::Parse(format!("bad trial count {t:?}")))?;
                    return Ok(FlipRate::Estimated { trials });
                }
                let v: f64 = s.parse().map_err(|_| Error::Parse(format!("unknown flip rate {s:?}")))?;
                if !(0.0..=0.5).contains(&v) {
                    return Err(Error::InvalidParameter(format!("flip rate {v} outside [0, 1/2]")));
                }
                Ok(FlipRate::Supplied(v))
            }
        }
    }
}

/// Law of the number of one-leaves of a depth-`h` subtree given its root,
/// as `(given root 0, given root 1)`.
fn leaf_count_laws(k: usize, h: u32, theta: f64) -> (Vec<f64>, Vec<f64>) {
    let stay = (1.0 + theta) / 2.0;
    let flip = (1.0 - theta) / 2.0;
    let mut q0 = vec![1.0, 0.0];
    let mut q1 = vec![0.0, 1.0];
    for _ in 0..h {
        // One child subtree's count given the parent label.
        let c0: Vec<f64> = q0.iter().zip(&q1).map(|(a, b)| stay * a + flip * b).collect();
        let c1: Vec<f64> = q0.iter().zip(&q1).map(|(a, b)| flip * a + stay * b).collect();
        q0 = convolve_power(&c0, k);
        q1 = convolve_power(&c1, k);
    }
    (q0, q1)
}

fn convolve_power(p: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..k {
        let mut next = vec![0.0; out.len() + p.len() - 1];
        for (i, a) in out.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in p.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        out = next;
    }
    out
}

/// Exact `P[majority of a depth-h subtree != its root]`, ties counting 1/2.
pub fn exact_majority_error(k: usize, h: u32, theta: f64) -> f64 {
    let (_, q1) = leaf_count_laws(k, h, theta);
    let total = q1.len() - 1;
    q1.iter()
        .enumerate()
        .map(|(ones, p)| match (2 * ones).cmp(&total) {
            std::cmp::Ordering::Less => *p,
            std::cmp::Ordering::Equal => p / 2.0,
            std::cmp::Ordering::Greater => 0.0,
        })
        .sum()
}

/// `1 / (k theta^2 - 1)` when `k theta^2 > 2`.
pub fn lemma_bound(k: usize, theta: f64) -> Option<f64> {
    let kt = k as f64 * theta * theta;
    (kt > 2.0).then(|| 1.0 / (kt - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlipRateEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
    /// Analytic bound, present when `k theta^2 > 2`.
    pub bound: Option<f64>,
}

/// Monte Carlo `P[subtree majority != subtree root]` for subtrees of depth
/// `d - d_prime`. Uses the exact leaf-count sampler; ties use a fresh bit.
pub fn estimate_flip_rate(
    shape: &TreeShape,
    theta: f64,
    d_prime: u32,
    trials: u64,
    seed: &SeedSpec,
) -> Result<FlipRateEstimate> {
    if d_prime > shape.d() || trials == 0 {
        return Err(Error::InvalidParameter("need d' <= d and trials > 0".into()));
    }
    let sub = shape.with_depth(shape.d() - d_prime)?;
    let seed = seed.with_tag("flip-rate");
    let wrong: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = StreamRng::new(&seed.trial(t));
            let root = (rng.next_u64() & 1) as u8;
            let ones = sample_leaf_count(&sub, theta, root, &mut rng).expect("theta validated");
            let tie = rng.next_u64() & 1 == 1;
            (majority_from_count(ones, sub.n() as u64, tie) != root) as u64
        })
        .sum();
    let p = wrong as f64 / trials as f64;
    Ok(FlipRateEstimate {
        estimate: p,
        stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        trials,
        bound: lemma_bound(shape.k(), theta),
    })
}

/// Subtree majorities at depth `d'` followed by Bayes decoding of those bits
/// on the reduced tree, treating them as leaves seen through a symmetric flip.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedBp {
    pub shape: TreeShape,
    pub theta: f64,
    pub d_prime: u32,
    pub s_hat: f64,
}

impl LinearizedBp {
    pub fn new(shape: &TreeShape, theta: f64, flip: FlipRate, seed: &SeedSpec) -> Result<Self> {
        if shape.d() == 0 {
            return Err(Error::InvalidParameter("linearized BP needs depth at least 1".into()));
        }
        if !(-1.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter(format!("theta = {theta} outside [-1, 1]")));
        }
        let d_prime = reduced_depth(shape);
        let h = shape.d() - d_prime;
        let s_hat = match flip {
            FlipRate::Supplied(s) => s,
            FlipRate::Exact => exact_majority_error(shape.k(), h, theta),
            FlipRate::LemmaBound => lemma_bound(shape.k(), theta).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "the majority bound needs k theta^2 > 2 (k = {}, theta = {theta})",
                    shape.k()
                ))
            })?,
            FlipRate::Estimated { trials } => estimate_flip_rate(shape, theta, d_prime, trials, seed)?.estimate,
        };
        Ok(LinearizedBp { shape: *shape, theta, d_prime, s_hat: s_hat.clamp(0.0, 0.5) })
    }

    pub fn reduced_shape(&self) -> TreeShape {
        self.shape.with_depth(self.d_prime).expect("smaller than a valid shape")
    }

    /// Majority bit of each depth-`d'` subtree; ties use per-node bits.
    pub fn majorities(&self, leaves: &[u8], seed: &SeedSpec) -> Vec<u8> {
        let block = self.shape.k().pow(self.shape.d() - self.d_prime);
        let rng = NodeRng::new(&seed.with_tag("tie"));
        leaves
            .chunks(block)
            .enumerate()
            .map(|(i, c)| {
                let ones = c.iter().filter(|&&x| x == 1).count() as u64;
                let tie = rng.word(NodeAddr::new(self.d_prime, i as u64)) & 1 == 1;
                majority_from_count(ones, block as u64, tie)
            })
            .collect()
    }

    pub fn estimate(&self, leaves: &[u8], seed: &SeedSpec) -> u8 {
        let bits = self.majorities(leaves, seed);
        if self.d_prime == 0 {
            return bits[0];
        }
        decide(binary_log_odds(&self.reduced_shape(), self.theta, &bits, self.s_hat)).0
    }
}

/// One-shot wrapper around [`LinearizedBp`]; `flip = None` means exact.
pub fn linearized_bp(
    shape: &TreeShape,
    theta: f64,
    leaves: &[u8],
    seed: &SeedSpec,
    flip: Option<FlipRate>,
) -> Result<u8> {
    let lin = LinearizedBp::new(shape, theta, flip.unwrap_or(FlipRate::Exact), seed)?;
    Ok(lin.estimate(leaves, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorReport {
    pub estimator: String,
    pub trials: u64,
    pub correct: u64,
    pub accuracy: f64,
    pub stderr: f64,
    pub advantage: f64,
}

impl EstimatorReport {
    pub fn from_counts(estimator: &str, correct: u64, trials: u64, m: usize) -> Self {
        let acc = correct as f64 / trials.max(1) as f64;
        EstimatorReport {
            estimator: estimator.to_string(),
            trials,
            correct,
            accuracy: acc,
            stderr: (acc * (1.0 - acc) / trials.max(1) as f64).sqrt(),
            advantage: acc - 1.0 / m as f64,
        }
    }
}

/// Root estimators for binary trees.
#[derive(Debug, Clone)]
pub enum Estimator {
    Majority,
    LinearizedBp(LinearizedBp),
    /// Full-tree BP rounding (float log-odds).
    Bp,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Majority => "majority",
            Estimator::LinearizedBp(_) => "linearized-bp",
            Estimator::Bp => "bp",
        }
    }

    pub fn estimate(&self, shape: &TreeShape, theta: f64, leaves: &[u8], seed: &SeedSpec) -> u8 {
        match self {
            Estimator::Majority => majority_estimate(leaves, &seed.with_tag("tie")),
            Estimator::LinearizedBp(l) => l.estimate(leaves, seed),
            Estimator::Bp => decide(binary_log_odds(shape, theta, leaves, 0.0)).0,
        }
    }
}

/// Paired Monte Carlo: every trial draws one tree (uniform root) and every
/// estimator sees the same leaves. Trial `t` uses `seed.trial(t)`.
pub fn run_binary_trials(
    shape: &TreeShape,
    theta: f64,
    trials: u64,
    seed: &SeedSpec,
    estimators: &[Estimator],
) -> Result<Vec<EstimatorReport>> {
    let channel = Channel::binary(from_f64(theta)?)?;
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<u64>> {
            let ts = seed.trial(t);
            let tree: LabelArray<u8> = generate_direct(shape, &channel, &ts.with_tag("gen"), None)?;
            let root = tree.root();
            Ok(estimators.iter().map(|e| (e.estimate(shape, theta, tree.leaves(), &ts) == root) as u64).collect())
        })
        .try_reduce(|| vec![0; estimators.len()], |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()))?;
    Ok(estimators.iter().zip(counts).map(|(e, c)| EstimatorReport::from_counts(e.name(), c, trials, 2)).collect())
}

/// Leaf-majority accuracy with a uniform root, sampled through the exact
/// leaf-count law so no tree is materialised. Misclassification is
/// `1 - accuracy` with the same standard error.
pub fn majority_by_counts(shape: &TreeShape, theta: f64, trials: u64, seed: &SeedSpec) -> Result<EstimatorReport> {
    let seed = seed.with_tag("count");
    let wrong: u64 = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> {
            let mut rng = StreamRng::new(&seed.trial(t));
            let root = (rng.next_u64() & 1) as u8;
            let ones = sample_leaf_count(shape, theta, root, &mut rng)?;
            let tie = rng.next_u64() & 1 == 1;
            Ok((majority_from_count(ones, shape.n() as u64, tie) != root) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(EstimatorReport::from_counts("majority", trials - wrong, trials, 2))
}

/// Exact `P_{s,d}`: Bayes accuracy with every leaf flipped independently
/// with probability `s`.
pub fn exact_p_sd(shape: &TreeShape, theta: &BigRational, s: &BigRational) -> Result<BigRational> {
    let noise = NoiseSpec::new(s.clone())?;
    let j = enumerate_joint_with(
        shape,
        &Channel::binary(theta.clone())?,
        Some(&Channel::flip(noise.s())?),
        EnumerationConfig::default(),
    )?;
    Ok(bayes_accuracy(&j))
}

/// Monte Carlo `P_{s,d}`: generate, flip leaves at rate `s`, decode with BP.
pub fn estimate_p_sd_mc(
    shape: &TreeShape,
    theta: f64,
    s: f64,
    trials: u64,
    seed: &SeedSpec,
) -> Result<EstimatorReport> {
    let theta_q = from_f64(theta)?;
    let noise = NoiseSpec::new(from_f64(s)?)?;
    let channel = Channel::binary(theta_q)?;
    let correct = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> {
            let ts = seed.trial(t);
            let tree: LabelArray<u8> = generate_direct(shape, &channel, &ts.with_tag("gen"), None)?;
            let noisy = add_leaf_noise(&tree, &noise, &ts.with_tag("noise"))?;
            let guess = decide(binary_log_odds(shape, theta, &noisy, s)).0;
            Ok((guess == tree.root()) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(EstimatorReport::from_counts("bp-noisy", correct, trials, 2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdValue {
    pub accuracy: f64,
    pub stderr: f64,
    pub exact: Option<BigRational>,
    pub trials: u64,
}

/// `P_{s,d}`, exact when the enumeration cap allows and Monte Carlo
/// otherwise.
pub fn estimate_p_sd(shape: &TreeShape, theta: f64, s: f64, trials: u64, seed: &SeedSpec) -> Result<PsdValue> {
    if config_count(shape, 2, EnumerationConfig::default().cap).is_ok() {
        let v = exact_p_sd(shape, &from_f64(theta)?, &from_f64(s)?)?;
        return Ok(PsdValue { accuracy: to_f64(&v), stderr: 0.0, exact: Some(v), trials: 0 });
    }
    let r = estimate_p_sd_mc(shape, theta, s, trials, seed)?;
    Ok(PsdValue { accuracy: r.accuracy, stderr: r.stderr, exact: None, trials })
}

/// `k * lambda_2(M)^2` with `lambda_2` the second-largest eigenvalue modulus.
///
/// Binary channels return `k theta^2` exactly. Otherwise, if `M - v 1^T`
/// (with `v` the stationary law) is nilpotent in exact arithmetic the
/// result is 0; else the float spectrum decides.
pub fn ks_parameter(channel: &Channel, k: usize) -> Result<f64> {
    channel.validate()?;
    if let Some(theta) = channel.theta() {
        return Ok(to_f64(&(int(k as i64) * theta * theta)));
    }
    let m = channel.m();
    if m == 1 {
        return Ok(0.0);
    }
    if let Some(v) = channel.stationary() {
        let a: Vec<Vec<BigRational>> = (0..m).map(|i| (0..m).map(|j| channel.prob(i, j) - &v[i]).collect()).collect();
        let mut power = a.clone();
        for _ in 0..m {
            if power.iter().flatten().all(|x| x.is_zero()) {
                return Ok(0.0);
            }
            power = mat_mul(&power, &a);
        }
    }
    let rows = channel.to_f64_rows();
    let mat = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
    let mut mags: Vec<f64> = mat.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let l2 = mags[1];
    Ok(k as f64 * l2 * l2)
}

fn mat_mul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let m = a.len();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = BigRational::zero();
                    for (l, row) in b.iter().enumerate() {
                        if !a[i][l].is_zero() && !row[j].is_zero() {
                            acc += &a[i][l] * &row[j];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}
