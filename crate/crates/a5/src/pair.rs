//! Pair labels `(σ, σ')` and the 3600-label broadcast model.
//!
//! A child of `(σ, σ')` is `(b, b⁻¹σ)` with probability 2/3 and `(b, b⁻¹σ')`
//! with probability 1/3, `b` uniform. Codes are `60 * first + second`.

use bcast_core::error::{Error, Result};
use bcast_core::rng::below;
use bcast_core::{LabelArray, NodeAddr, NodeRng, SeedSpec, TreeShape};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::group::{Class, Elem, ORDER};

pub const PAIR_LABELS: usize = ORDER * ORDER;
pub const CLASS_PAIR_LABELS: usize = 16;

const PAR_LEVEL: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairLabel {
    pub first: Elem,
    pub second: Elem,
}

impl PairLabel {
    pub fn new(first: Elem, second: Elem) -> Self {
        PairLabel { first, second }
    }

    pub fn code(self) -> u16 {
        (self.first.index() * ORDER + self.second.index()) as u16
    }

    pub fn from_code(c: u16) -> Self {
        let c = c as usize;
        PairLabel { first: Elem::from_index(c / ORDER), second: Elem::from_index(c % ORDER) }
    }

    /// `first * second`
    pub fn product(self) -> Elem {
        self.first.mul(self.second)
    }

    pub fn classes(self) -> ClassPair {
        ClassPair { first: self.first.class(), second: self.second.class() }
    }

    pub fn all() -> impl Iterator<Item = PairLabel> {
        (0..PAIR_LABELS as u16).map(PairLabel::from_code)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassPair {
    pub first: Class,
    pub second: Class,
}

impl ClassPair {
    pub fn new(first: Class, second: Class) -> Self {
        ClassPair { first, second }
    }

    pub fn code(self) -> u8 {
        self.first.code() * 4 + self.second.code()
    }

    pub fn from_code(c: u8) -> Self {
        ClassPair { first: Class::ALL[(c / 4) as usize], second: Class::ALL[(c % 4) as usize] }
    }

    pub fn all() -> impl Iterator<Item = ClassPair> {
        (0..CLASS_PAIR_LABELS as u8).map(ClassPair::from_code)
    }
}

/// One pair-model edge given the two random words of the child node.
#[inline]
pub fn pair_child(parent: PairLabel, words: [u64; 2]) -> PairLabel {
    let b = Elem::from_index(below(words[0], ORDER as u64) as usize);
    let target = if below(words[1], 3) < 2 { parent.first } else { parent.second };
    PairLabel::new(b, b.inv().mul(target))
}

pub fn generate_pair_model(shape: &TreeShape, seed: &SeedSpec, root: Option<PairLabel>) -> Result<LabelArray<u16>> {
    let rng = NodeRng::new(seed);
    let mut out = LabelArray::<u16>::zeros(*shape, PAIR_LABELS)?;
    let root = root.unwrap_or_else(|| PairLabel::from_code(below(rng.word(NodeAddr::ROOT), PAIR_LABELS as u64) as u16));
    out.set(NodeAddr::ROOT, root.code());
    let k = shape.k();
    for level in 0..shape.d() {
        let (parent, child) = out.parent_child_mut(level);
        let run = |(i, c): (usize, &mut u16)| {
            let p = PairLabel::from_code(parent[i / k]);
            *c = pair_child(p, rng.words(NodeAddr::new(level + 1, i as u64))).code();
        };
        if child.len() >= PAR_LEVEL {
            child.par_iter_mut().enumerate().for_each(run);
        } else {
            child.iter_mut().enumerate().for_each(run);
        }
    }
    Ok(out)
}

/// Replaces every pair label by its pair of conjugacy classes.
pub fn project_to_classes(labels: &LabelArray<u16>) -> Result<LabelArray<u8>> {
    if labels.m() != PAIR_LABELS {
        return Err(Error::SizeMismatch { expected: PAIR_LABELS, got: labels.m() });
    }
    let shape = labels.shape();
    let levels = (0..=shape.d())
        .map(|l| labels.level(l).iter().map(|&c| PairLabel::from_code(c).classes().code()).collect())
        .collect();
    LabelArray::from_levels(shape, CLASS_PAIR_LABELS, levels)
}
