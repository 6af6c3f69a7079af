// SPDX-License-Identifier: Apache-2.0

//! Counter-based pseudorandom streams.
//!
//! Every random quantity in the simulator is addressed rather than drawn in
//! sequence: a [`CounterRng`] is a 64-bit key, and the value at counter `n`
//! is the `(n + 1)`-th output of SplitMix64 seeded with that key:
//!
//! ```text
//! at(n) = mix64(key + (n + 1) * 0x9E3779B97F4A7C15)      (wrapping)
//! mix64(z): z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!           z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!           z ^ (z >> 31)
//! ```
//!
//! Sub-streams are keyed with [`CounterRng::derive`]:
//! `key' = mix64(key ^ mix64(tag + 0x9E3779B97F4A7C15))`.
//!
//! Uniform floats take the top 53 bits: `(at(n) >> 11) * 2^-53`, which lies
//! in `[0, 1)`. All arithmetic is wrapping 64-bit integer math, so the
//! streams are identical on every platform.

/// SplitMix64 increment (odd approximation of 2^64 / phi).
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
#[inline]
pub const fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A keyed, random-access pseudorandom stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub const fn new(key: u64) -> Self {
        Self { key }
    }

    pub const fn key(self) -> u64 {
        self.key
    }

    /// Keys an independent sub-stream identified by `tag`.
    #[inline]
    pub const fn derive(self, tag: u64) -> Self {
        Self {
            key: mix64(self.key ^ mix64(tag.wrapping_add(GOLDEN_GAMMA))),
        }
    }

    #[inline]
    pub const fn at(self, counter: u64) -> u64 {
        mix64(
            self.key
                .wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
        )
    }

    /// Uniform draw in `[0, 1)` at `counter`.
    #[inline]
    pub fn unit_at(self, counter: u64) -> f64 {
        (self.at(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
