//! Label generators.
//!
//! Three mechanisms produce the binary broadcast law:
//!
//! - [`generate_direct`]: each child drawn from its parent's channel column.
//! - [`generate_path_product`]: independent per-node flip bits XOR-ed along
//!   root-to-node paths.
//! - [`generate_via_restrictions`]: composition of random restrictions, each
//!   node receiving a constant or copying its parent.
//!
//! Each has an exact-law counterpart (`exact_law_*`) that enumerates the
//! generator's own randomness level by level, so equivalence can be checked
//! in rational arithmetic.

use std::collections::HashMap;

use num::{BigRational, One, Signed, Zero};
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::joint::{config_count, EnumerationConfig, JointDistribution};
use crate::labels::{config_index, LabelArray, LabelCode};
use crate::rational::{fixed_point, int, Dyadic};
use crate::rng::{below, node_randomness, NodeRng, SeedSpec, StreamRng};
use crate::tree::{NodeAddr, TreeShape};

// Levels at least this long are filled in parallel.
const PAR_LEVEL: usize = 1 << 15;

fn check_root(root: Option<usize>, m: usize) -> Result<()> {
    match root {
        Some(r) if r >= m => Err(Error::InvalidParameter(format!("root label {r} not below m = {m}"))),
        _ => Ok(()),
    }
}

fn draw_root(rng: &NodeRng, root: Option<usize>, m: usize) -> usize {
    root.unwrap_or_else(|| below(rng.word(NodeAddr::ROOT), m as u64) as usize)
}

/// Fills `child` from `parent` with one word per child node.
fn fill_level<L: LabelCode>(parent: &[L], child: &mut [L], k: usize, level: u32, f: impl Fn(L, NodeAddr) -> L + Sync) {
    let run = |(i, c): (usize, &mut L)| {
        *c = f(parent[i / k], NodeAddr::new(level, i as u64));
    };
    if child.len() >= PAR_LEVEL {
        child.par_iter_mut().enumerate().for_each(run);
    } else {
        child.iter_mut().enumerate().for_each(run);
    }
}

/// Broadcast with an arbitrary channel; the root is uniform unless given.
pub fn generate_direct<L: LabelCode>(
    shape: &TreeShape,
    channel: &Channel,
    seed: &SeedSpec,
    root: Option<usize>,
) -> Result<LabelArray<L>> {
    let m = channel.m();
    check_root(root, m)?;
    let rng = NodeRng::new(seed);
    let mut out = LabelArray::<L>::zeros(*shape, m)?;
    out.set(NodeAddr::ROOT, L::from_usize(draw_root(&rng, root, m)));
    for level in 0..shape.d() {
        let (parent, child) = out.parent_child_mut(level);
        fill_level(parent, child, shape.k(), level + 1, |p, addr| {
            L::from_usize(channel.sample(p.to_usize(), rng.word(addr)))
        });
    }
    Ok(out)
}

/// One level of the path-product construction: child = parent XOR flip.
pub fn xor_level(parent: &[u8], flips: &[bool], k: usize) -> Result<Vec<u8>> {
    if flips.len() != parent.len() * k {
        return Err(Error::SizeMismatch { expected: parent.len() * k, got: flips.len() });
    }
    Ok(flips.iter().enumerate().map(|(i, &f)| parent[i / k] ^ f as u8).collect())
}

/// Labels determined by a root bit and a flip bit per non-root node.
pub fn path_product_from_flips(shape: &TreeShape, root: u8, flip: impl Fn(NodeAddr) -> bool) -> Result<LabelArray<u8>> {
    let mut out = LabelArray::<u8>::zeros(*shape, 2)?;
    out.set(NodeAddr::ROOT, root & 1);
    for level in 0..shape.d() {
        let (parent, child) = out.parent_child_mut(level);
        for (i, c) in child.iter_mut().enumerate() {
            *c = parent[i / shape.k()] ^ flip(NodeAddr::new(level + 1, i as u64)) as u8;
        }
    }
    Ok(out)
}

/// Binary broadcast via flip bits of probability `(1 - theta) / 2`.
pub fn generate_path_product(
    shape: &TreeShape,
    theta: &BigRational,
    seed: &SeedSpec,
    root: Option<usize>,
) -> Result<LabelArray<u8>> {
    check_theta(theta)?;
    check_root(root, 2)?;
    let rng = NodeRng::new(seed);
    let threshold = fixed_point(&((BigRational::one() - theta) / int(2)));
    let root = draw_root(&rng, root, 2) as u8;
    let mut out = LabelArray::<u8>::zeros(*shape, 2)?;
    out.set(NodeAddr::ROOT, root);
    for level in 0..shape.d() {
        let (parent, child) = out.parent_child_mut(level);
        fill_level(parent, child, shape.k(), level + 1, |p, addr| p ^ ((rng.word(addr) as u128) < threshold) as u8);
    }
    Ok(out)
}

fn check_theta(theta: &BigRational) -> Result<()> {
    if theta.abs() > BigRational::one() {
        return Err(Error::InvalidParameter(format!("theta = {theta} outside [-1, 1]")));
    }
    Ok(())
}

fn check_restriction_theta(theta: &BigRational) -> Result<()> {
    if theta.is_negative() || theta > &BigRational::one() {
        return Err(Error::InvalidParameter(format!("restrictions need theta in [0, 1], got {theta}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Zero,
    One,
    Star,
}

/// One restriction symbol per node of a tree level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    pub symbols: Vec<Symbol>,
}

/// Per-symbol probabilities `(P[0], P[1], P[*]) = ((1-theta)/2, (1-theta)/2, theta)`.
pub fn restriction_law(theta: &BigRational) -> Result<[(Symbol, BigRational); 3]> {
    check_restriction_theta(theta)?;
    let half = (BigRational::one() - theta) / int(2);
    Ok([(Symbol::Zero, half.clone()), (Symbol::One, half), (Symbol::Star, theta.clone())])
}

struct SymbolSampler {
    zero: u128,
    zero_or_one: u128,
}

impl SymbolSampler {
    fn new(theta: &BigRational) -> Result<Self> {
        check_restriction_theta(theta)?;
        let half = (BigRational::one() - theta) / int(2);
        Ok(SymbolSampler { zero: fixed_point(&half), zero_or_one: fixed_point(&(half * int(2))) })
    }

    #[inline]
    fn sample(&self, word: u64) -> Symbol {
        let u = word as u128;
        if u < self.zero {
            Symbol::Zero
        } else if u < self.zero_or_one {
            Symbol::One
        } else {
            Symbol::Star
        }
    }
}

/// Draws the restriction for one tree level.
pub fn sample_restriction(theta: &BigRational, seed: &SeedSpec, level: u32, len: usize) -> Result<Restriction> {
    let s = SymbolSampler::new(theta)?;
    let rng = NodeRng::new(seed);
    Ok(Restriction { symbols: (0..len).map(|i| s.sample(rng.word(NodeAddr::new(level, i as u64)))).collect() })
}

/// Child `v` gets `r_v` when it is a constant, its parent's label otherwise.
pub fn apply_restriction(x: &[u8], r: &Restriction, k: usize) -> Result<Vec<u8>> {
    if r.symbols.len() != x.len() * k {
        return Err(Error::SizeMismatch { expected: x.len() * k, got: r.symbols.len() });
    }
    Ok(r.symbols
        .iter()
        .enumerate()
        .map(|(i, s)| match s {
            Symbol::Zero => 0,
            Symbol::One => 1,
            Symbol::Star => x[i / k],
        })
        .collect())
}

/// Binary broadcast as a composition of `d` random restrictions applied to
/// the root bit. Symbols are drawn one level at a time.
pub fn generate_via_restrictions(
    shape: &TreeShape,
    theta: &BigRational,
    seed: &SeedSpec,
    root: Option<usize>,
) -> Result<LabelArray<u8>> {
    check_root(root, 2)?;
    let rng = NodeRng::new(seed);
    let root = draw_root(&rng, root, 2) as u8;
    let mut levels = vec![vec![root]];
    for level in 1..=shape.d() {
        let r = sample_restriction(theta, seed, level, shape.level_len(level))?;
        let next = apply_restriction(levels.last().unwrap(), &r, shape.k())?;
        levels.push(next);
    }
    LabelArray::from_levels(*shape, 2, levels)
}

/// Number of distinct variables still influencing the output after `h`
/// restriction rounds, starting from the tracked leaves.
///
/// A tracked input survives a round iff its symbol is `*`; its dependence then
/// moves to the parent, and survivors meeting at one ancestor merge.
pub fn live_inputs_after(
    shape: &TreeShape,
    tracked: &[usize],
    h: u32,
    theta: &BigRational,
    seed: &SeedSpec,
) -> Result<usize> {
    if h > shape.d() {
        return Err(Error::InvalidParameter(format!("h = {h} exceeds depth {}", shape.d())));
    }
    if let Some(&bad) = tracked.iter().find(|&&i| i >= shape.n()) {
        return Err(Error::InvalidParameter(format!("leaf {bad} out of range")));
    }
    let s = SymbolSampler::new(theta)?;
    let rng = NodeRng::new(seed);
    let mut live: Vec<u64> = tracked.iter().map(|&i| i as u64).collect();
    live.sort_unstable();
    live.dedup();
    for round in 0..h {
        let level = shape.d() - round;
        live.retain(|&i| s.sample(rng.word(NodeAddr::new(level, i))) == Symbol::Star);
        for i in live.iter_mut() {
            *i /= shape.k() as u64;
        }
        live.dedup();
    }
    Ok(live.len())
}

/// Exact biased bit from exactly `exp + 1` uniform bits: with
/// `theta = num / 2^exp`, returns 1 iff the bits, read as an integer, fall
/// below `2^exp + num`, which happens with probability `(1 + theta) / 2`.
pub fn biased_bit_from_bits(theta: Dyadic, bits: u64) -> bool {
    let mask = (1u64 << (theta.exp + 1)) - 1;
    (bits & mask) < (1u64 << theta.exp) + theta.num
}

/// [`biased_bit_from_bits`] fed from the node's random stream.
pub fn biased_bit_exact(theta: &BigRational, seed: &SeedSpec, addr: NodeAddr) -> Result<bool> {
    let d = Dyadic::try_from(theta)?;
    let bits = node_randomness(seed, addr, d.exp + 1)?;
    Ok(biased_bit_from_bits(d, bits.words[0]))
}

/// Threshold for `t` uniform bits: `floor((1 + theta)/2 * 2^t)`.
pub fn approx_threshold(theta: &BigRational, t: u32) -> Result<u128> {
    check_theta(theta)?;
    if t == 0 || t > 64 {
        return Err(Error::InvalidParameter(format!("bit budget {t} outside 1..=64")));
    }
    let p = (BigRational::one() + theta) / int(2);
    let scaled = (p * BigRational::from_integer(num::BigInt::one() << t as usize)).floor();
    Ok(num::ToPrimitive::to_u128(&scaled.to_integer()).unwrap())
}

/// Approximate biased bit: `t` uniform bits read as a binary fraction are
/// compared against `(1 + theta) / 2`; the bias error is below `2^-t`.
pub fn biased_bit_approx_from_bits(threshold: u128, t: u32, bits: u64) -> bool {
    let mask = if t == 64 { u64::MAX } else { (1u64 << t) - 1 };
    ((bits & mask) as u128) < threshold
}

pub fn biased_bit_approx(theta: &BigRational, t: u32, seed: &SeedSpec, addr: NodeAddr) -> Result<bool> {
    let threshold = approx_threshold(theta, t)?;
    let bits = node_randomness(seed, addr, t)?;
    Ok(biased_bit_approx_from_bits(threshold, t, bits.words[0]))
}

/// Independent symmetric leaf flips with probability `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoiseSpec {
    s: BigRational,
}

impl NoiseSpec {
    pub fn new(s: BigRational) -> Result<Self> {
        if s.is_negative() || s > BigRational::new(1.into(), 2.into()) {
            return Err(Error::InvalidParameter(format!("noise rate {s} outside [0, 1/2]")));
        }
        Ok(NoiseSpec { s })
    }

    pub fn s(&self) -> &BigRational {
        &self.s
    }
}

/// Leaves of `x`, each flipped independently with probability `s`.
pub fn add_leaf_noise(x: &LabelArray<u8>, spec: &NoiseSpec, seed: &SeedSpec) -> Result<Vec<u8>> {
    if x.m() != 2 {
        return Err(Error::NotBinary(x.m()));
    }
    let rng = NodeRng::new(seed);
    let threshold = fixed_point(&spec.s);
    let level = x.shape().d();
    Ok(x.leaves()
        .iter()
        .enumerate()
        .map(|(i, &v)| v ^ ((rng.word(NodeAddr::new(level, i as u64)) as u128) < threshold) as u8)
        .collect())
}

/// Number of one-labelled leaves of a binary broadcast tree with the given
/// root, sampled level by level: the ones at level `l + 1` are
/// `Bin(k * ones_l, (1+theta)/2) + Bin(k * zeros_l, (1-theta)/2)`. This is the
/// exact law of the leaf count (children are conditionally independent given
/// their parents) without materialising the tree.
pub fn sample_leaf_count(shape: &TreeShape, theta: f64, root: u8, rng: &mut StreamRng) -> Result<u64> {
    if !(-1.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta = {theta} outside [-1, 1]")));
    }
    let stay = (1.0 + theta) / 2.0;
    let flip = (1.0 - theta) / 2.0;
    let k = shape.k() as u64;
    let mut ones = root as u64;
    let mut total = 1u64;
    let draw = |n: u64, p: f64, rng: &mut StreamRng| -> u64 {
        if n == 0 {
            0
        } else {
            Binomial::new(n, p).expect("probability in [0, 1]").sample(rng)
        }
    };
    for _ in 0..shape.d() {
        let zeros = total - ones;
        ones = draw(k * ones, stay, rng) + draw(k * zeros, flip, rng);
        total *= k;
    }
    Ok(ones)
}

/// Exact conditional leaf law of [`path_product_from_flips`] with flip
/// probability `(1 - theta)/2`, obtained by enumerating every flip assignment
/// of each level and pushing the level distribution through [`xor_level`].
pub fn exact_law_path_product(
    shape: &TreeShape,
    theta: &BigRational,
    cfg: EnumerationConfig,
) -> Result<JointDistribution> {
    check_theta(theta)?;
    let flip = (BigRational::one() - theta) / int(2);
    let stay = BigRational::one() - &flip;
    let law = [(false, stay), (true, flip)];
    exact_law_levelwise(shape, cfg, &law, |parent, assignment| xor_level(parent, assignment, shape.k()))
}

/// Exact conditional leaf law of [`generate_via_restrictions`], enumerating
/// all `3^(k^l)` symbol assignments of each level.
pub fn exact_law_restrictions(
    shape: &TreeShape,
    theta: &BigRational,
    cfg: EnumerationConfig,
) -> Result<JointDistribution> {
    let law = restriction_law(theta)?;
    exact_law_levelwise(shape, cfg, &law, |parent, assignment| {
        apply_restriction(parent, &Restriction { symbols: assignment.to_vec() }, shape.k())
    })
}

fn exact_law_levelwise<S: Copy>(
    shape: &TreeShape,
    cfg: EnumerationConfig,
    law: &[(S, BigRational)],
    step: impl Fn(&[u8], &[S]) -> Result<Vec<u8>>,
) -> Result<JointDistribution> {
    let configs = config_count(shape, 2, cfg.cap)?;
    let mut cond = Vec::with_capacity(2);
    for root in 0..2u8 {
        let mut dist: HashMap<Vec<u8>, BigRational> = HashMap::from([(vec![root], BigRational::one())]);
        for level in 1..=shape.d() {
            let len = shape.level_len(level);
            let assignments = enumerate_assignments(law, len, cfg.cap)?;
            let mut next: HashMap<Vec<u8>, BigRational> = HashMap::new();
            for (parent, p) in &dist {
                for (assignment, w) in &assignments {
                    let child = step(parent, assignment)?;
                    *next.entry(child).or_insert_with(BigRational::zero) += p * w;
                }
            }
            dist = next;
        }
        let mut row = vec![BigRational::zero(); configs];
        for (leaves, p) in dist {
            row[config_index(&leaves, 2)] += p;
        }
        cond.push(row);
    }
    Ok(JointDistribution { shape: *shape, m: 2, cond })
}

/// All length-`len` sequences over the symbol law with their probabilities;
/// zero-probability symbols are skipped.
fn enumerate_assignments<S: Copy>(
    law: &[(S, BigRational)],
    len: usize,
    cap: u64,
) -> Result<Vec<(Vec<S>, BigRational)>> {
    let live: Vec<&(S, BigRational)> = law.iter().filter(|(_, p)| !p.is_zero()).collect();
    let mut count: u64 = 1;
    for _ in 0..len {
        count = count
            .checked_mul(live.len() as u64)
            .filter(|&c| c <= cap)
            .ok_or_else(|| Error::EnumerationCap { needed: format!("{}^{len}", live.len()), cap })?;
    }
    let mut out = vec![(Vec::with_capacity(len), BigRational::one())];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|(seq, p)| {
                live.iter().map(move |(s, q)| {
                    let mut seq = seq.clone();
                    seq.push(*s);
                    (seq, &p * q)
                })
            })
            .collect();
    }
    Ok(out)
}

/// Empirical frequency helper used by callers reporting flip or agreement
/// rates.
pub fn agreement(a: &[u8], b: &[u8]) -> f64 {
    let same = a.iter().zip(b).filter(|(x, y)| x == y).count();
    same as f64 / a.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::joint::{enumerate_joint, total_variation};
    use crate::rational::rat;

    #[test]
    fn direct_theta_one_copies_root() {
        let shape = TreeShape::new(3, 4).unwrap();
        let ch = Channel::binary(int(1)).unwrap();
        let t: LabelArray<u8> = generate_direct(&shape, &ch, &SeedSpec::new(5, "gen"), Some(1)).unwrap();
        for l in 0..=4 {
            assert!(t.level(l).iter().all(|&v| v == 1));
        }
    }

    #[test]
    fn rejects_root_out_of_range() {
        let shape = TreeShape::new(2, 1).unwrap();
        let ch = Channel::binary(rat(1, 2)).unwrap();
        assert!(generate_direct::<u8>(&shape, &ch, &SeedSpec::new(5, "gen"), Some(2)).is_err());
    }

    #[test]
    fn forced_zero_flips_copy_root() {
        let shape = TreeShape::new(2, 3).unwrap();
        let t = path_product_from_flips(&shape, 1, |_| false).unwrap();
        assert!(t.leaves().iter().all(|&v| v == 1));
        let t = path_product_from_flips(&shape, 0, |a| a.level == 1).unwrap();
        assert!(t.leaves().iter().all(|&v| v == 1));
    }

    #[test]
    fn restriction_definition() {
        let r = Restriction { symbols: vec![Symbol::Star, Symbol::Zero] };
        assert_eq!(apply_restriction(&[1], &r, 2).unwrap(), vec![1, 0]);
        let all_star = Restriction { symbols: vec![Symbol::Star; 4] };
        assert_eq!(apply_restriction(&[1, 0], &all_star, 2).unwrap(), vec![1, 1, 0, 0]);
        let all_zero = Restriction { symbols: vec![Symbol::Zero; 4] };
        assert_eq!(apply_restriction(&[1, 1], &all_zero, 2).unwrap(), vec![0; 4]);
        assert!(apply_restriction(&[1], &all_zero, 2).is_err());
    }

    #[test]
    fn restrictions_reject_negative_theta() {
        let shape = TreeShape::new(2, 1).unwrap();
        assert!(generate_via_restrictions(&shape, &rat(-1, 2), &SeedSpec::new(1, "gen"), None).is_err());
    }

    #[test]
    fn exact_laws_match_enumeration_small() {
        let shape = TreeShape::new(2, 2).unwrap();
        for theta in [rat(0, 1), rat(1, 4), rat(1, 2), rat(3, 4), rat(1, 1)] {
            let j = enumerate_joint(&shape, &Channel::binary(theta.clone()).unwrap()).unwrap();
            let pp = exact_law_path_product(&shape, &theta, EnumerationConfig::default()).unwrap();
            let rr = exact_law_restrictions(&shape, &theta, EnumerationConfig::default()).unwrap();
            for a in 0..2 {
                assert!(total_variation(&j.cond[a], &pp.cond[a]).unwrap().is_zero());
                assert!(total_variation(&j.cond[a], &rr.cond[a]).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn dyadic_thresholds() {
        let count = |d: Dyadic| (0..1u64 << (d.exp + 1)).filter(|&b| biased_bit_from_bits(d, b)).count();
        assert_eq!(count(Dyadic::new(6, 3).unwrap()), 14);
        assert_eq!(count(Dyadic::new(3, 2).unwrap()), 7);
        assert_eq!(count(Dyadic::new(0, 0).unwrap()), 1);
        assert_eq!(count(Dyadic::new(1, 1).unwrap()), 3);
        let err = biased_bit_exact(&rat(1, 3), &SeedSpec::new(0, "bit"), NodeAddr::ROOT).unwrap_err();
        assert!(matches!(err, Error::NonDyadic(_)));
    }

    #[test]
    fn approx_matches_exact_on_dyadics() {
        let d = Dyadic::new(5, 3).unwrap();
        let th = approx_threshold(&d.to_rational(), 4).unwrap();
        for b in 0..16u64 {
            assert_eq!(biased_bit_approx_from_bits(th, 4, b), biased_bit_from_bits(d, b));
        }
    }

    #[test]
    fn noise_spec_range() {
        assert!(NoiseSpec::new(rat(1, 2)).is_ok());
        assert!(NoiseSpec::new(rat(3, 5)).is_err());
        assert!(NoiseSpec::new(rat(-1, 5)).is_err());
    }

    #[test]
    fn live_inputs_edge_cases() {
        let shape = TreeShape::new(2, 4).unwrap();
        let seed = SeedSpec::new(9, "restrict");
        assert_eq!(live_inputs_after(&shape, &[0, 3, 7], 1, &int(0), &seed).unwrap(), 0);
        assert_eq!(live_inputs_after(&shape, &[0, 1, 2, 3], 2, &int(1), &seed).unwrap(), 1);
        assert_eq!(live_inputs_after(&shape, &[0, 5], 0, &rat(1, 2), &seed).unwrap(), 2);
        assert!(live_inputs_after(&shape, &[0], 5, &rat(1, 2), &seed).is_err());
    }
}
