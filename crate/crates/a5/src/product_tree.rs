//! Pair-model generation driven by a fixed word `σ_1..σ_{2^{d+1}}`.
//!
//! Every node carries a segment `[j, j + 2h)` of the word split in the middle
//! plus three boundary randomizers `(l, b, r)`; its label is
//! `(l·σ_j⋯σ_{j+h-1}·b, b⁻¹·σ_{j+h}⋯σ_{j+2h-1}·r)`. A child draws a fresh
//! `b'''` and halves the first segment with probability 2/3, the second
//! otherwise. Segment products come from prefix products, so resolving a
//! label costs a constant number of table lookups.

use bcast_core::error::{Error, Result};
use bcast_core::rng::below;
use bcast_core::{LabelArray, NodeAddr, NodeRng, SeedSpec, TreeShape};

use crate::group::{Elem, ORDER};
use crate::pair::{PairLabel, PAIR_LABELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentNode {
    pub start: u32,
    pub half: u32,
    pub left: Elem,
    pub mid: Elem,
    pub right: Elem,
}

impl SegmentNode {
    fn root(d: u32) -> Self {
        SegmentNode { start: 0, half: 1 << d, left: Elem::IDENTITY, mid: Elem::IDENTITY, right: Elem::IDENTITY }
    }

    /// `b3` is the fresh randomizer, `first` the 2/3 branch.
    pub fn child(&self, b3: Elem, first: bool) -> SegmentNode {
        let half = self.half / 2;
        if first {
            SegmentNode { start: self.start, half, left: self.left, mid: b3, right: self.mid }
        } else {
            SegmentNode { start: self.start + self.half, half, left: self.mid.inv(), mid: b3, right: self.right }
        }
    }
}

/// Prefix products of a word, for O(1) segment products.
#[derive(Debug, Clone)]
pub struct SegmentProducts {
    prefix: Vec<Elem>,
}

impl SegmentProducts {
    pub fn new(word: &[Elem]) -> Self {
        let mut prefix = Vec::with_capacity(word.len() + 1);
        prefix.push(Elem::IDENTITY);
        for &g in word {
            let last = *prefix.last().unwrap();
            prefix.push(last.mul(g));
        }
        SegmentProducts { prefix }
    }

    /// `σ_{a+1}⋯σ_b` in zero-based half-open form `[a, b)`.
    pub fn range(&self, a: usize, b: usize) -> Elem {
        self.prefix[a].inv().mul(self.prefix[b])
    }

    pub fn label(&self, node: &SegmentNode) -> PairLabel {
        let (j, h) = (node.start as usize, node.half as usize);
        PairLabel::new(
            node.left.mul(self.range(j, j + h)).mul(node.mid),
            node.mid.inv().mul(self.range(j + h, j + 2 * h)).mul(node.right),
        )
    }
}

/// Node states for every level, root first.
pub fn product_tree_nodes(d: u32, k: usize, seed: &SeedSpec) -> Result<Vec<Vec<SegmentNode>>> {
    let shape = TreeShape::new(k, d)?;
    let rng = NodeRng::new(seed);
    let mut levels = vec![vec![SegmentNode::root(d)]];
    for level in 1..=d {
        let parents = &levels[level as usize - 1];
        let nodes: Vec<SegmentNode> = (0..shape.level_len(level))
            .map(|i| {
                let w = rng.words(NodeAddr::new(level, i as u64));
                let b3 = Elem::from_index(below(w[0], ORDER as u64) as usize);
                parents[i / k].child(b3, below(w[1], 3) < 2)
            })
            .collect();
        levels.push(nodes);
    }
    Ok(levels)
}

pub fn product_tree_generate(d: u32, sigma: &[Elem], k: usize, seed: &SeedSpec) -> Result<LabelArray<u16>> {
    let expected = 1usize << (d + 1);
    if sigma.len() != expected {
        return Err(Error::SizeMismatch { expected, got: sigma.len() });
    }
    let shape = TreeShape::new(k, d)?;
    let seg = SegmentProducts::new(sigma);
    let levels =
        product_tree_nodes(d, k, seed)?.iter().map(|lv| lv.iter().map(|n| seg.label(n).code()).collect()).collect();
    LabelArray::from_levels(shape, PAIR_LABELS, levels)
}

/// `(∏ first half, ∏ second half)`, the root label of the product tree.
pub fn root_of_word(sigma: &[Elem]) -> PairLabel {
    let seg = SegmentProducts::new(sigma);
    let h = sigma.len() / 2;
    PairLabel::new(seg.range(0, h), seg.range(h, sigma.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::product;

    fn word(n: usize, salt: u64) -> Vec<Elem> {
        (0..n).map(|i| Elem::from_index(((i as u64 * 37 + salt * 11) % 60) as usize)).collect()
    }

    #[test]
    fn root_telescopes_to_word_product() {
        for d in 0..4 {
            let sigma = word(1 << (d + 1), d as u64);
            let t = product_tree_generate(d, &sigma, 2, &SeedSpec::new(3, "pt")).unwrap();
            let r = PairLabel::from_code(t.root());
            assert_eq!(r, root_of_word(&sigma));
            assert_eq!(r.product(), product(&sigma));
        }
    }

    #[test]
    fn edges_factorize_parent_entries() {
        let d = 4;
        let sigma = word(32, 5);
        let t = product_tree_generate(d, &sigma, 3, &SeedSpec::new(8, "pt")).unwrap();
        for level in 1..=d {
            for (i, &c) in t.level(level).iter().enumerate() {
                let p = PairLabel::from_code(t.level(level - 1)[i / 3]);
                let prod = PairLabel::from_code(c).product();
                assert!(prod == p.first || prod == p.second);
            }
        }
    }

    #[test]
    fn leaves_cover_adjacent_letters() {
        let sigma = word(8, 2);
        let nodes = product_tree_nodes(2, 2, &SeedSpec::new(0, "pt")).unwrap();
        for n in &nodes[2] {
            assert_eq!(n.half, 1);
            assert!(n.start % 2 == 0 && n.start < 8);
        }
        assert!(product_tree_generate(2, &sigma[..7], 2, &SeedSpec::new(0, "pt")).is_err());
    }
}
