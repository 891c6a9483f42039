//! Per-level label storage for one realization of a broadcast tree.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::tree::{NodeAddr, TreeShape};

/// Storage type for label codes: `u8` when `m <= 256`, `u16` otherwise.
pub trait LabelCode: Copy + Eq + Ord + Default + Debug + Send + Sync + 'static {
    const BYTES: usize;
    const MAX_LABELS: usize;
    fn to_usize(self) -> usize;
    fn from_usize(v: usize) -> Self;
}

impl LabelCode for u8 {
    const BYTES: usize = 1;
    const MAX_LABELS: usize = 256;
    #[inline]
    fn to_usize(self) -> usize {
        self as usize
    }
    #[inline]
    fn from_usize(v: usize) -> Self {
        v as u8
    }
}

impl LabelCode for u16 {
    const BYTES: usize = 2;
    const MAX_LABELS: usize = 65536;
    #[inline]
    fn to_usize(self) -> usize {
        self as usize
    }
    #[inline]
    fn from_usize(v: usize) -> Self {
        v as u16
    }
}

const MAGIC: &[u8; 6] = b"BCAST1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelArray<L: LabelCode = u8> {
    shape: TreeShape,
    m: usize,
    data: Vec<L>,
}

impl<L: LabelCode> LabelArray<L> {
    /// All nodes set to label 0.
    pub fn zeros(shape: TreeShape, m: usize) -> Result<Self> {
        if m == 0 || m > L::MAX_LABELS {
            return Err(Error::InvalidParameter(format!("{m} labels do not fit a {}-byte code", L::BYTES)));
        }
        Ok(LabelArray { shape, m, data: vec![L::default(); shape.total_nodes()] })
    }

    /// Builds from explicit levels, checking sizes and codes.
    pub fn from_levels(shape: TreeShape, m: usize, levels: Vec<Vec<L>>) -> Result<Self> {
        let mut out = Self::zeros(shape, m)?;
        if levels.len() != shape.d() as usize + 1 {
            return Err(Error::SizeMismatch { expected: shape.d() as usize + 1, got: levels.len() });
        }
        for (l, lv) in levels.into_iter().enumerate() {
            let want = shape.level_len(l as u32);
            if lv.len() != want {
                return Err(Error::SizeMismatch { expected: want, got: lv.len() });
            }
            out.level_mut(l as u32).copy_from_slice(&lv);
        }
        out.check_codes()?;
        Ok(out)
    }

    pub fn shape(&self) -> TreeShape {
        self.shape
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn level(&self, level: u32) -> &[L] {
        let off = self.shape.level_offset(level);
        &self.data[off..off + self.shape.level_len(level)]
    }

    pub fn level_mut(&mut self, level: u32) -> &mut [L] {
        let off = self.shape.level_offset(level);
        let len = self.shape.level_len(level);
        &mut self.data[off..off + len]
    }

    /// Two adjacent levels: `(level, level + 1)`.
    pub fn parent_child_mut(&mut self, level: u32) -> (&[L], &mut [L]) {
        let off = self.shape.level_offset(level);
        let mid = self.shape.level_offset(level + 1);
        let len = self.shape.level_len(level + 1);
        let (head, tail) = self.data.split_at_mut(mid);
        (&head[off..], &mut tail[..len])
    }

    pub fn leaves(&self) -> &[L] {
        self.level(self.shape.d())
    }

    pub fn leaves_mut(&mut self) -> &mut [L] {
        self.level_mut(self.shape.d())
    }

    pub fn root(&self) -> L {
        self.data[0]
    }

    pub fn get(&self, addr: NodeAddr) -> L {
        self.data[self.shape.level_offset(addr.level) + addr.index as usize]
    }

    pub fn set(&mut self, addr: NodeAddr, v: L) {
        let off = self.shape.level_offset(addr.level);
        self.data[off + addr.index as usize] = v;
    }

    pub fn check_codes(&self) -> Result<()> {
        match self.data.iter().find(|c| c.to_usize() >= self.m) {
            Some(c) => Err(Error::InvalidParameter(format!("label code {c:?} not below m = {}", self.m))),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let levels: Vec<Vec<usize>> =
            (0..=self.shape.d()).map(|l| self.level(l).iter().map(|c| c.to_usize()).collect()).collect();
        serde_json::json!({ "k": self.shape.k(), "d": self.shape.d(), "m": self.m, "levels": levels })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            k: usize,
            d: u32,
            m: usize,
            levels: Vec<Vec<usize>>,
        }
        let r: Repr = serde_json::from_value(v.clone())?;
        let shape = TreeShape::new(r.k, r.d)?;
        if let Some(&bad) = r.levels.iter().flatten().find(|&&c| c >= r.m) {
            return Err(Error::InvalidParameter(format!("label code {bad} not below m = {}", r.m)));
        }
        let levels = r.levels.into_iter().map(|lv| lv.into_iter().map(L::from_usize).collect()).collect();
        Self::from_levels(shape, r.m, levels)
    }

    /// `"BCAST1"`, then `k`, `d`, `m` as little-endian `u32`, then every level
    /// in order, one byte per code when `m <= 256` and two (little-endian)
    /// otherwise.
    pub fn to_bytes(&self) -> Vec<u8> {
        let wide = self.m > 256;
        let mut out = Vec::with_capacity(18 + self.data.len() * if wide { 2 } else { 1 });
        out.extend_from_slice(MAGIC);
        for v in [self.shape.k() as u32, self.shape.d(), self.m as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for c in &self.data {
            let c = c.to_usize();
            if wide {
                out.extend_from_slice(&(c as u16).to_le_bytes());
            } else {
                out.push(c as u8);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 18 || &bytes[..6] != MAGIC {
            return Err(Error::Parse("missing BCAST1 header".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[6 + 4 * i..10 + 4 * i].try_into().unwrap());
        let shape = TreeShape::new(word(0) as usize, word(1))?;
        let m = word(2) as usize;
        let wide = m > 256;
        let body = &bytes[18..];
        let width = if wide { 2 } else { 1 };
        if body.len() != shape.total_nodes() * width {
            return Err(Error::SizeMismatch { expected: shape.total_nodes() * width, got: body.len() });
        }
        let mut out = Self::zeros(shape, m)?;
        for (i, slot) in out.data.iter_mut().enumerate() {
            let c = if wide { u16::from_le_bytes([body[2 * i], body[2 * i + 1]]) as usize } else { body[i] as usize };
            *slot = L::from_usize(c);
        }
        out.check_codes()?;
        Ok(out)
    }
}

/// Packs a binary leaf vector into the integer enumeration index used by the
/// joint-distribution oracle (leaf 0 is the least significant digit).
pub fn config_index<L: LabelCode>(leaves: &[L], m: usize) -> usize {
    leaves.iter().rev().fold(0usize, |acc, c| acc * m + c.to_usize())
}

/// Inverse of [`config_index`].
pub fn config_from_index(mut idx: usize, m: usize, n: usize) -> Vec<u8> {
    (0..n)
        .map(|_| {
            let c = idx % m;
            idx /= m;
            c as u8
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> LabelArray {
        let shape = TreeShape::new(2, 2).unwrap();
        LabelArray::from_levels(shape, 2, vec![vec![1], vec![1, 0], vec![1, 1, 0, 1]]).unwrap()
    }

    #[test]
    fn level_access() {
        let a = sample();
        assert_eq!(a.root(), 1);
        assert_eq!(a.level(1), &[1, 0]);
        assert_eq!(a.leaves(), &[1, 1, 0, 1]);
        assert_eq!(a.get(NodeAddr::new(2, 2)), 0);
    }

    #[test]
    fn json_and_binary_round_trip() {
        let a = sample();
        let j = a.to_json();
        assert_eq!(j["levels"][2], serde_json::json!([1, 1, 0, 1]));
        assert_eq!(LabelArray::<u8>::from_json(&j).unwrap(), a);
        let b = a.to_bytes();
        assert_eq!(&b[..6], b"BCAST1");
        assert_eq!(&b[6..10], &2u32.to_le_bytes());
        assert_eq!(b.len(), 18 + 7);
        assert_eq!(LabelArray::<u8>::from_bytes(&b).unwrap(), a);
    }

    #[test]
    fn wide_codes_use_two_bytes() {
        let shape = TreeShape::new(3, 1).unwrap();
        let a = LabelArray::<u16>::from_levels(shape, 3600, vec![vec![3599], vec![0, 1000, 60]]).unwrap();
        let b = a.to_bytes();
        assert_eq!(b.len(), 18 + 8);
        assert_eq!(LabelArray::<u16>::from_bytes(&b).unwrap(), a);
    }

    #[test]
    fn rejects_bad_codes() {
        let shape = TreeShape::new(2, 1).unwrap();
        assert!(LabelArray::<u8>::from_levels(shape, 2, vec![vec![0], vec![2, 0]]).is_err());
        assert!(LabelArray::<u8>::zeros(shape, 300).is_err());
        assert!(LabelArray::<u8>::from_bytes(b"BCAST2").is_err());
    }

    #[test]
    fn config_index_round_trip() {
        let leaves = [1u8, 0, 1, 1];
        let idx = config_index(&leaves, 2);
        assert_eq!(idx, 0b1101);
        assert_eq!(config_from_index(idx, 2, 4), leaves.to_vec());
    }
}
