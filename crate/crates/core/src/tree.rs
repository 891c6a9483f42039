//! Regular k-ary trees with level-order integer addressing.
//!
//! Node `(level, index)` has parent `(level - 1, index / k)` and children
//! `(level + 1, index * k .. index * k + k)`. Levels are stored one after
//! another, so the flat position of a node is `offset(level) + index`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ShapeRepr", into = "ShapeRepr")]
pub struct TreeShape {
    k: usize,
    d: u32,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct ShapeRepr {
    k: usize,
    d: u32,
}

impl TryFrom<ShapeRepr> for TreeShape {
    type Error = Error;
    fn try_from(r: ShapeRepr) -> Result<Self> {
        TreeShape::new(r.k, r.d)
    }
}

impl From<TreeShape> for ShapeRepr {
    fn from(s: TreeShape) -> Self {
        ShapeRepr { k: s.k, d: s.d }
    }
}

impl TreeShape {
    pub fn new(k: usize, d: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidShape("arity must be at least 1".into()));
        }
        let mut n: usize = 1;
        let mut total: usize = 1;
        for _ in 0..d {
            n = n.checked_mul(k).ok_or_else(|| Error::InvalidShape(format!("k^d overflows for k = {k}, d = {d}")))?;
            total = total
                .checked_add(n)
                .ok_or_else(|| Error::InvalidShape(format!("node count overflows for k = {k}, d = {d}")))?;
        }
        Ok(TreeShape { k, d, n })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Leaf count, `k^d`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level_len(&self, level: u32) -> usize {
        debug_assert!(level <= self.d);
        self.k.pow(level)
    }

    /// Flat position of the first node of `level` in level-order storage.
    pub fn level_offset(&self, level: u32) -> usize {
        if self.k == 1 {
            level as usize
        } else {
            (self.k.pow(level) - 1) / (self.k - 1)
        }
    }

    pub fn total_nodes(&self) -> usize {
        self.level_offset(self.d) + self.n
    }

    /// The same arity with a different depth.
    pub fn with_depth(&self, d: u32) -> Result<Self> {
        TreeShape::new(self.k, d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeAddr {
    pub level: u32,
    pub index: u64,
}

impl NodeAddr {
    pub const ROOT: NodeAddr = NodeAddr { level: 0, index: 0 };

    pub fn new(level: u32, index: u64) -> Self {
        NodeAddr { level, index }
    }

    pub fn parent(&self, k: usize) -> Option<NodeAddr> {
        (self.level > 0).then(|| NodeAddr::new(self.level - 1, self.index / k as u64))
    }

    pub fn children(&self, k: usize) -> impl Iterator<Item = NodeAddr> {
        let level = self.level + 1;
        let first = self.index * k as u64;
        (first..first + k as u64).map(move |index| NodeAddr { level, index })
    }

    /// Ancestor `up` levels above this node.
    pub fn ancestor(&self, k: usize, up: u32) -> NodeAddr {
        assert!(up <= self.level);
        NodeAddr::new(self.level - up, self.index / (k as u64).pow(up))
    }

    pub fn is_valid_in(&self, shape: &TreeShape) -> bool {
        self.level <= shape.d() && self.index < shape.level_len(self.level) as u64
    }
}

/// Number of edges on the path between two leaves of the same tree.
pub fn leaf_distance(shape: &TreeShape, a: usize, b: usize) -> u32 {
    let k = shape.k() as u64;
    let (mut a, mut b) = (a as u64, b as u64);
    let mut up = 0;
    while a != b {
        a /= k;
        b /= k;
        up += 1;
    }
    2 * up
}
