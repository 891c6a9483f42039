//! Recursive reconstruction of the root label from one level of (estimated)
//! labels.
//!
//! Each parent estimate is built from tallies over its `k` children:
//!
//! - pair labels: tally the children's products `first * second`;
//! - class pairs: tally the second class of children whose first class is the
//!   identity class.
//!
//! The most common value becomes the parent's first entry and the runner-up
//! its second; when the runner-up count is below `tau` times the top count
//! the parent is declared diagonal. Ties go to the smaller code.

use std::fmt;
use std::str::FromStr;

use bcast_core::error::{Error, Result};
use bcast_core::rng::below;
use bcast_core::{NodeAddr, NodeRng, Rational, SeedSpec, TreeShape};
use num::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::group::{Class, Elem, ORDER};
use crate::pair::{generate_pair_model, ClassPair, PairLabel, CLASS_PAIR_LABELS};
use crate::quotient::generate_class_model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Pair3600,
    Class16,
}

impl Model {
    pub fn labels(self) -> usize {
        match self {
            Model::Pair3600 => ORDER * ORDER,
            Model::Class16 => CLASS_PAIR_LABELS,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Pair3600 => "pair3600",
            Model::Class16 => "class16",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pair3600" | "pair" => Ok(Model::Pair3600),
            "class16" | "class" => Ok(Model::Class16),
            _ => Err(Error::Parse(format!("unknown model {s:?}, expected pair3600 or class16"))),
        }
    }
}

/// Default diagonal threshold.
pub fn default_tau() -> Rational {
    Rational::new(1.into(), 5.into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconstruction {
    pub root: u16,
    /// Nodes whose estimate had no usable tallies and was drawn at random.
    pub flagged: u64,
}

/// Top two `(value, count)` entries of a tally; ties prefer smaller values.
fn top_two(tally: &[u32]) -> ((usize, u32), (usize, u32)) {
    let mut top = (0, 0);
    let mut second = (0, 0);
    for (v, &c) in tally.iter().enumerate() {
        if c > top.1 {
            second = top;
            top = (v, c);
        } else if c > second.1 {
            second = (v, c);
        }
    }
    (top, second)
}

/// `runner < tau * top` with `tau = num / den`.
fn below_threshold(runner: u32, top: u32, num: u64, den: u64) -> bool {
    (runner as u64) * den < num * top as u64
}

fn tau_parts(tau: &Rational) -> Result<(u64, u64)> {
    let (n, d) = (tau.numer().to_u64(), tau.denom().to_u64());
    match (n, d) {
        (Some(n), Some(d)) if n <= d => Ok((n, d)),
        _ => Err(Error::InvalidParameter(format!("tau = {tau} must lie in [0, 1]"))),
    }
}

/// Estimates one parent from its children's labels. `None` when no child is
/// informative (class pairs with no identity-first child).
pub fn reconstruct_parent(children: &[u16], model: Model, tau: &Rational) -> Result<Option<u16>> {
    let (tn, td) = tau_parts(tau)?;
    match model {
        Model::Pair3600 => {
            let mut tally = [0u32; ORDER];
            for &c in children {
                tally[PairLabel::from_code(c).product().index()] += 1;
            }
            let ((a, ca), (b, cb)) = top_two(&tally);
            if ca == 0 {
                return Ok(None);
            }
            let second = if below_threshold(cb, ca, tn, td) { a } else { b };
            Ok(Some(PairLabel::new(Elem::from_index(a), Elem::from_index(second)).code()))
        }
        Model::Class16 => {
            let mut tally = [0u32; 4];
            for &c in children {
                let cp = ClassPair::from_code(c as u8);
                if cp.first == Class::Identity {
                    tally[cp.second as usize] += 1;
                }
            }
            let ((a, ca), (b, cb)) = top_two(&tally);
            if ca == 0 {
                return Ok(None);
            }
            let second = if below_threshold(cb, ca, tn, td) { a } else { b };
            Ok(Some(ClassPair::new(Class::ALL[a], Class::ALL[second]).code() as u16))
        }
    }
}

/// Reduces `labels` (one full level, `k^h` entries) to a root estimate.
/// Uninformative nodes are drawn uniformly from `seed` (per node address,
/// counting levels up from the input) and counted in `flagged`.
pub fn recursive_reconstruct(
    labels: &[u16],
    k: usize,
    model: Model,
    tau: &Rational,
    seed: &SeedSpec,
) -> Result<Reconstruction> {
    if k < 2 {
        return Err(Error::InvalidParameter("recursive reconstruction needs k >= 2".into()));
    }
    let mut len = labels.len();
    let mut height = 0u32;
    while len > 1 {
        if len % k != 0 {
            return Err(Error::InvalidParameter(format!("{} labels is not a power of k = {k}", labels.len())));
        }
        len /= k;
        height += 1;
    }
    if labels.is_empty() {
        return Err(Error::InvalidParameter("no labels".into()));
    }
    let m = model.labels();
    if let Some(&bad) = labels.iter().find(|&&c| c as usize >= m) {
        return Err(Error::InvalidParameter(format!("label code {bad} out of range for {model}")));
    }
    let rng = NodeRng::new(seed);
    let mut flagged = 0;
    let mut cur = labels.to_vec();
    for up in 1..=height {
        let mut next = Vec::with_capacity(cur.len() / k);
        for (i, kids) in cur.chunks(k).enumerate() {
            match reconstruct_parent(kids, model, tau)? {
                Some(v) => next.push(v),
                None => {
                    flagged += 1;
                    next.push(below(rng.word(NodeAddr::new(up, i as u64)), m as u64) as u16);
                }
            }
        }
        cur = next;
    }
    Ok(Reconstruction { root: cur[0], flagged })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AccuracyCount {
    pub correct: u64,
    pub trials: u64,
    /// Trials in which at least one node estimate was drawn at random.
    pub flagged_trials: u64,
}

/// Generates `trials` trees of the given model with uniform roots and
/// reconstructs each root from its leaves.
pub fn model_accuracy(
    model: Model,
    k: usize,
    d: u32,
    trials: u64,
    tau: &Rational,
    seed: &SeedSpec,
) -> Result<AccuracyCount> {
    let shape = TreeShape::new(k, d)?;
    tau_parts(tau)?;
    let (correct, flagged_trials) = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(u64, u64)> {
            let s = seed.trial(t);
            let (leaves, root) = match model {
                Model::Pair3600 => {
                    let tree = generate_pair_model(&shape, &s.with_tag("pair"), None)?;
                    (tree.leaves().to_vec(), tree.root())
                }
                Model::Class16 => {
                    let tree = generate_class_model(&shape, &s.with_tag("class"), None)?;
                    (tree.leaves().iter().map(|&c| c as u16).collect(), tree.root() as u16)
                }
            };
            let r = recursive_reconstruct(&leaves, k, model, tau, &s.with_tag("reconstruct"))?;
            Ok(((r.root == root) as u64, (r.flagged > 0) as u64))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok(AccuracyCount { correct, trials, flagged_trials })
}
