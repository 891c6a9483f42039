//! Brute-force exact leaf laws for small trees.
//!
//! `P[leaves = x | root = a]` is built bottom-up: for a subtree of height `h`
//! the table over its `k^h` leaves is the product of its children's tables
//! pushed through one channel step. Configuration `x` is indexed as
//! `sum_i x_i m^i`, leaf 0 least significant, so child block `c` of a height-`h`
//! subtree occupies the digits `[c k^(h-1), (c+1) k^(h-1))`.

use num::{BigRational, One, Zero};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_fraction};
use crate::tree::TreeShape;

pub const DEFAULT_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationConfig {
    pub cap: u64,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig { cap: DEFAULT_CAP }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub shape: TreeShape,
    pub m: usize,
    /// `cond[a][x] = P[leaves = x | root = a]`.
    pub cond: Vec<Vec<BigRational>>,
}

/// `m^(k^d)` if it fits under `cap`.
pub fn config_count(shape: &TreeShape, m: usize, cap: u64) -> Result<usize> {
    let mut count: u64 = 1;
    for _ in 0..shape.n() {
        count = match count.checked_mul(m as u64) {
            Some(c) if c <= cap => c,
            _ => return Err(Error::EnumerationCap { needed: format!("{m}^{}", shape.n()), cap }),
        };
    }
    Ok(count as usize)
}

pub fn enumerate_joint(shape: &TreeShape, channel: &Channel) -> Result<JointDistribution> {
    enumerate_joint_with(shape, channel, None, EnumerationConfig::default())
}

/// As [`enumerate_joint`], optionally passing every leaf through an
/// observation channel (`P[observed = x | leaf = a]`), e.g. a symmetric flip.
pub fn enumerate_joint_with(
    shape: &TreeShape,
    channel: &Channel,
    observation: Option<&Channel>,
    cfg: EnumerationConfig,
) -> Result<JointDistribution> {
    let m = channel.m();
    if let Some(obs) = observation {
        if obs.m() != m {
            return Err(Error::SizeMismatch { expected: m, got: obs.m() });
        }
    }
    config_count(shape, m, cfg.cap)?;
    let k = shape.k();

    // Height-0 table: the leaf itself (possibly observed through noise).
    let mut table: Vec<Vec<BigRational>> = (0..m)
        .map(|a| {
            (0..m)
                .map(|x| match observation {
                    Some(obs) => obs.prob(x, a).clone(),
                    None if x == a => BigRational::one(),
                    None => BigRational::zero(),
                })
                .collect()
        })
        .collect();
    let mut block = m; // configurations of a height-h subtree

    for _ in 0..shape.d() {
        // q[a][y]: one edge from a parent labelled a, then the child's subtree.
        let q: Vec<Vec<BigRational>> = (0..m)
            .map(|a| {
                (0..block)
                    .map(|y| {
                        let mut acc = BigRational::zero();
                        for (b, row) in table.iter().enumerate() {
                            let t = channel.prob(b, a);
                            if !t.is_zero() && !row[y].is_zero() {
                                acc += t * &row[y];
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let next_block = block.pow(k as u32);
        table = q
            .iter()
            .map(|qa| {
                (0..next_block)
                    .map(|x| {
                        let mut rest = x;
                        let mut acc = BigRational::one();
                        for _ in 0..k {
                            let y = rest % block;
                            rest /= block;
                            if qa[y].is_zero() {
                                return BigRational::zero();
                            }
                            acc *= &qa[y];
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        block = next_block;
    }
    Ok(JointDistribution { shape: *shape, m, cond: table })
}

impl JointDistribution {
    pub fn configs(&self) -> usize {
        self.cond[0].len()
    }

    /// Leaf law under a uniform root.
    pub fn mixture(&self) -> Vec<BigRational> {
        let w = BigRational::new(1.into(), (self.m as i64).into());
        (0..self.configs()).map(|x| self.cond.iter().map(|c| &c[x]).sum::<BigRational>() * &w).collect()
    }

    /// Root posterior for configuration `x` under a uniform prior.
    pub fn posterior(&self, x: usize) -> Result<Vec<BigRational>> {
        let total: BigRational = self.cond.iter().map(|c| &c[x]).sum();
        if total.is_zero() {
            return Err(Error::ImpossibleEvidence);
        }
        Ok(self.cond.iter().map(|c| &c[x] / &total).collect())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let cond: Vec<Vec<String>> = self.cond.iter().map(|row| row.iter().map(format_rational).collect()).collect();
        serde_json::json!({ "k": self.shape.k(), "d": self.shape.d(), "m": self.m, "cond": cond })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            k: usize,
            d: u32,
            m: usize,
            cond: Vec<Vec<String>>,
        }
        let r: Repr = serde_json::from_value(v.clone())?;
        let cond = r
            .cond
            .iter()
            .map(|row| row.iter().map(|s| parse_fraction(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        if cond.len() != r.m {
            return Err(Error::SizeMismatch { expected: r.m, got: cond.len() });
        }
        Ok(JointDistribution { shape: TreeShape::new(r.k, r.d)?, m: r.m, cond })
    }
}

/// Optimal detection accuracy `sum_x max_a P[x | a] / m`.
pub fn bayes_accuracy(j: &JointDistribution) -> BigRational {
    let mut acc = BigRational::zero();
    for x in 0..j.configs() {
        let best = j.cond.iter().map(|c| &c[x]).max().unwrap();
        acc += best;
    }
    acc / BigRational::from_integer((j.m as i64).into())
}

/// Total variation distance between two laws on the same support.
pub fn total_variation(p: &[BigRational], q: &[BigRational]) -> Result<BigRational> {
    if p.len() != q.len() {
        return Err(Error::SizeMismatch { expected: p.len(), got: q.len() });
    }
    let sum: BigRational = p.iter().zip(q).map(|(a, b)| num::abs(a - b)).sum();
    Ok(sum / BigRational::from_integer(2.into()))
}
