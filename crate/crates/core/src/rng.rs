//! Counter-based random streams.
//!
//! Every random number used by the estimators is a pure function of
//! `(seed, level, outer index, inner index)` and its position in the stream. Work can therefore be
//! split across threads in any order without changing a single bit of the
//! output.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

/// Inner index reserved for the outer (risk factor) draw of a path.
pub const OUTER_SLOT: u32 = u32::MAX;

/// Largest outer index representable in the counter layout (56 bits).
pub const MAX_OUTER_INDEX: u64 = (1 << 56) - 1;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = (a as u64) * (b as u64);
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with 10 rounds.
#[inline]
pub fn philox4x32(ctr: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = ctr;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Identifies the random stream of one outer sample at one level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PathStream {
    pub seed: u64,
    pub level: u8,
    pub outer: u64,
}

impl PathStream {
    pub fn new(seed: u64, level: u8, outer: u64) -> Self {
        debug_assert!(outer <= MAX_OUTER_INDEX);
        Self { seed, level, outer }
    }

    /// Generator for the outer draw of this path.
    pub fn outer_rng(&self) -> StreamRng {
        self.rng(OUTER_SLOT)
    }

    /// Generator for the `k`-th inner draw of this path.
    pub fn inner_rng(&self, k: u32) -> StreamRng {
        debug_assert!(k != OUTER_SLOT);
        self.rng(k)
    }

    /// Full 128-bit counter prefix and key; two streams are distinct iff
    /// these differ.
    pub fn stream_key(&self, slot: u32) -> ([u32; 3], [u32; 2]) {
        let hi = ((self.level as u32) << 24) | ((self.outer >> 32) as u32 & 0x00FF_FFFF);
        (
            [slot, self.outer as u32, hi],
            [self.seed as u32, (self.seed >> 32) as u32],
        )
    }

    fn rng(&self, slot: u32) -> StreamRng {
        let (prefix, key) = self.stream_key(slot);
        StreamRng::new(prefix, key)
    }
}

/// Random stream of one `(seed, level, outer, inner)` slot.
///
/// The slot identity is mixed through one Philox block; the resulting 64-bit
/// state drives a SplitMix64 sequence for the handful of draws a single inner
/// path needs.
#[derive(Debug, Clone)]
pub struct StreamRng {
    state: u64,
}

const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

impl StreamRng {
    pub fn new(prefix: [u32; 3], key: [u32; 2]) -> Self {
        let b = philox4x32([0, prefix[0], prefix[1], prefix[2]], key);
        Self {
            state: (b[0] as u64) | ((b[1] as u64) << 32),
        }
    }

    /// Standard normal draw.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }

    /// Uniform draw on [0, 1) with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for StreamRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(SPLITMIX_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

/// splitmix64 finalizer, used to derive independent base seeds.
pub fn mix_seed(mut x: u64) -> u64 {
    x = x.wrapping_add(SPLITMIX_GAMMA);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of replication `m` given a base seed.
pub fn replication_seed(base: u64, m: u64) -> u64 {
    base ^ m
}
