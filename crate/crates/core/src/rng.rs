//! Counter-based per-node randomness.
//!
//! Every random draw in the crate is `philox4x32_10(counter, key)` where the
//! key is derived from `(master_seed, stream_tag)` and the counter encodes the
//! node address plus a block number. Draws are therefore independent of
//! evaluation order and thread schedule, and any single node can be
//! regenerated in isolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::NodeAddr;

/// Largest block `node_randomness` will hand out.
pub const MAX_WIDTH: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_tag: String,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_tag: impl Into<String>) -> Self {
        SeedSpec { master_seed, stream_tag: stream_tag.into() }
    }

    /// Same master seed, different consumer.
    pub fn with_tag(&self, tag: &str) -> Self {
        SeedSpec::new(self.master_seed, tag)
    }

    /// Independent seed for Monte Carlo trial `t`. All consumers of one trial
    /// share the derived master seed, so estimators compared within a trial
    /// see the same tree.
    pub fn trial(&self, t: u64) -> Self {
        let derived = splitmix64(self.master_seed ^ splitmix64(t.wrapping_add(0x5851_f42d_4c95_7f2d)));
        SeedSpec::new(derived, self.stream_tag.clone())
    }
}

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with 10 rounds (Salmon et al., Random123).
#[inline]
pub fn philox4x32_10(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
    for round in 0..10 {
        if round > 0 {
            key[0] = key[0].wrapping_add(PHILOX_W0);
            key[1] = key[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// A prepared `(seed, tag)` key. Cheap to copy and share across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeRng {
    key: [u32; 2],
}

impl NodeRng {
    pub fn new(seed: &SeedSpec) -> Self {
        let k = splitmix64(seed.master_seed ^ splitmix64(fnv1a(seed.stream_tag.as_bytes())));
        NodeRng { key: [k as u32, (k >> 32) as u32] }
    }

    /// 128 bits for `block` at `addr`.
    #[inline]
    pub fn block(&self, addr: NodeAddr, block: u32) -> [u32; 4] {
        philox4x32_10([addr.index as u32, (addr.index >> 32) as u32, addr.level, block], self.key)
    }

    /// The first two 64-bit words at `addr`.
    #[inline]
    pub fn words(&self, addr: NodeAddr) -> [u64; 2] {
        let b = self.block(addr, 0);
        [b[0] as u64 | (b[1] as u64) << 32, b[2] as u64 | (b[3] as u64) << 32]
    }

    #[inline]
    pub fn word(&self, addr: NodeAddr) -> u64 {
        self.words(addr)[0]
    }

    /// Word `w` of the node's stream (two words per Philox block).
    #[inline]
    pub fn word_at(&self, addr: NodeAddr, w: u32) -> u64 {
        let b = self.block(addr, w / 2);
        if w % 2 == 0 {
            b[0] as u64 | (b[1] as u64) << 32
        } else {
            b[2] as u64 | (b[3] as u64) << 32
        }
    }
}

/// Uniform integer in `[0, n)` from a 64-bit word (multiply-shift; bias below
/// `n / 2^64`).
#[inline]
pub fn below(word: u64, n: u64) -> u64 {
    ((word as u128 * n as u128) >> 64) as u64
}

/// A block of `width` uniform bits, little-endian across the words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitBlock {
    pub width: u32,
    pub words: [u64; 4],
}

impl BitBlock {
    pub fn bit(&self, i: u32) -> bool {
        assert!(i < self.width);
        (self.words[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }
}

/// Deterministic bits for one node under one `(seed, tag)` stream.
pub fn node_randomness(seed: &SeedSpec, addr: NodeAddr, width: u32) -> Result<BitBlock> {
    if width > MAX_WIDTH {
        return Err(Error::WidthTooLarge { requested: width, limit: MAX_WIDTH });
    }
    let rng = NodeRng::new(seed);
    let mut words = [0u64; 4];
    for (i, w) in words.iter_mut().enumerate() {
        let first_bit = 64 * i as u32;
        if first_bit >= width {
            break;
        }
        let mut v = rng.word_at(addr, i as u32);
        let remaining = width - first_bit;
        if remaining < 64 {
            v &= (1u64 << remaining) - 1;
        }
        *w = v;
    }
    Ok(BitBlock { width, words })
}

/// A sequential stream built on the counter generator, for consumers that are
/// not attached to tree nodes (formula corpora, synthetic oracles).
#[derive(Debug, Clone)]
pub struct StreamRng {
    rng: NodeRng,
    counter: u64,
}

impl StreamRng {
    pub fn new(seed: &SeedSpec) -> Self {
        StreamRng { rng: NodeRng::new(seed), counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let w = self.rng.word_at(NodeAddr::new(u32::MAX, self.counter / 2), (self.counter % 2) as u32);
        self.counter += 1;
        w
    }

    pub fn below(&mut self, n: u64) -> u64 {
        below(self.next_u64(), n)
    }

    /// True with probability `num / den` (fixed-point, error below 2^-64).
    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        (self.next_u64() as u128 * den as u128) < (num as u128) << 64
    }
}

// Lets library distributions (binomial draws) run on the counter stream.
impl rand_core::RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        StreamRng::next_u64(self) as u32
    }

    fn next_u64(&mut self) -> u64 {
        StreamRng::next_u64(self)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let w = StreamRng::next_u64(self).to_le_bytes();
            chunk.copy_from_slice(&w[..chunk.len()]);
        }
    }
}
