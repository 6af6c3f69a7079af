// SPDX-License-Identifier: Apache-2.0

//! Statistical model of SRAM power-up behavior.
//!
//! Each cell carries a ground-truth bias: the probability that it settles to
//! 1 at power-on. Stable cells have bias exactly 0.0 or 1.0; the remaining
//! ("fuzzy") cells draw a bias uniformly from `[fuzzy_bias_low,
//! fuzzy_bias_high)`, which is kept strictly inside `(0, 1)`.
//!
//! Randomness is addressed through [`CounterRng`] streams:
//!
//! * bias of cell `i`: streams `device_seed / BIAS_*` at counter `i`
//! * power-up bit of cell `i` in cycle `c`: stream
//!   `device_seed / READ / c` at counter `i`; the bit is 1 iff the uniform
//!   draw is below the bias.

use alloc::vec;
use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// 8 KiB of SRAM, one cell per bit.
pub const DEFAULT_CELL_COUNT: usize = 8 * 1024 * 8;
/// Addresses are 16 bits wide.
pub const MAX_CELL_COUNT: usize = 1 << 16;

const TAG_STABLE_PICK: u64 = 0x5354_4142_4c45; // "STABLE"
const TAG_STABLE_BIT: u64 = 0x0053_5442_4954; // "STBIT"
const TAG_FUZZY_BIAS: u64 = 0x0046_555a_5a59; // "FUZZY"
const TAG_READ: u64 = 0x5245_4144; // "READ"

/// Distribution of per-cell power-up biases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasModel {
    /// Fraction of cells whose bias is exactly 0.0 or 1.0.
    pub stable_fraction: f64,
    pub fuzzy_bias_low: f64,
    pub fuzzy_bias_high: f64,
}

impl Default for BiasModel {
    fn default() -> Self {
        Self {
            stable_fraction: 0.95,
            fuzzy_bias_low: 0.05,
            fuzzy_bias_high: 0.95,
        }
    }
}

impl BiasModel {
    /// Every cell stable: the noiseless device.
    pub const IDEAL: BiasModel = BiasModel {
        stable_fraction: 1.0,
        fuzzy_bias_low: 0.05,
        fuzzy_bias_high: 0.95,
    };

    pub fn with_stable_fraction(self, stable_fraction: f64) -> Self {
        Self {
            stable_fraction,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.stable_fraction) {
            return Err(Error::InvalidConfig("stable_fraction must lie in [0, 1]"));
        }
        let (lo, hi) = (self.fuzzy_bias_low, self.fuzzy_bias_high);
        if !(lo > 0.0 && lo <= hi && hi < 1.0) {
            return Err(Error::InvalidConfig(
                "fuzzy bias range must satisfy 0 < low <= high < 1",
            ));
        }
        Ok(())
    }
}

/// The simulated silicon. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct SramPufDevice {
    biases: Vec<f64>,
    device_seed: u64,
}

impl SramPufDevice {
    /// Draws a device. The bias array is a pure function of the arguments.
    pub fn build(cell_count: usize, model: &BiasModel, device_seed: u64) -> Result<Self> {
        check_cell_count(cell_count)?;
        model.validate()?;
        let root = CounterRng::new(device_seed);
        let pick = root.derive(TAG_STABLE_PICK);
        let stable_bit = root.derive(TAG_STABLE_BIT);
        let fuzzy = root.derive(TAG_FUZZY_BIAS);
        let span = model.fuzzy_bias_high - model.fuzzy_bias_low;
        let biases = (0..cell_count as u64)
            .map(|i| {
                if pick.unit_at(i) < model.stable_fraction {
                    (stable_bit.at(i) >> 63) as f64
                } else {
                    model.fuzzy_bias_low + span * fuzzy.unit_at(i)
                }
            })
            .collect();
        Ok(Self {
            biases,
            device_seed,
        })
    }

    /// Builds a device from explicit biases (test rigs, complement constructions).
    pub fn from_biases(biases: Vec<f64>, device_seed: u64) -> Result<Self> {
        check_cell_count(biases.len())?;
        if biases.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(Error::InvalidConfig("bias must lie in [0, 1]"));
        }
        Ok(Self {
            biases,
            device_seed,
        })
    }

    /// Replaces the bias of one cell.
    pub fn with_bias(mut self, index: usize, bias: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&bias) {
            return Err(Error::InvalidConfig("bias must lie in [0, 1]"));
        }
        let cell_count = self.cell_count();
        let slot = self.biases.get_mut(index).ok_or(Error::AddressOutOfRange {
            address: index,
            cell_count,
        })?;
        *slot = bias;
        Ok(self)
    }

    pub fn cell_count(&self) -> usize {
        self.biases.len()
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn device_seed(&self) -> u64 {
        self.device_seed
    }

    /// Opaque 16-byte identity: truncated SHA-256 over seed and bias array.
    pub fn device_id(&self) -> [u8; 16] {
        let mut h = Sha256::new();
        h.update(b"ternpuf-device/v1");
        h.update((self.cell_count() as u64).to_le_bytes());
        h.update(self.device_seed.to_le_bytes());
        for b in &self.biases {
            h.update(b.to_bits().to_le_bytes());
        }
        let digest = h.finalize();
        let mut id = [0u8; 16];
        id.copy_from_slice(&digest[..16]);
        id
    }

    pub(crate) fn read_stream(&self, cycle_seed: u64) -> CounterRng {
        CounterRng::new(self.device_seed)
            .derive(TAG_READ)
            .derive(cycle_seed)
    }

    #[inline]
    pub(crate) fn is_degenerate(&self, index: usize) -> bool {
        let bias = self.biases[index];
        bias <= 0.0 || bias >= 1.0
    }

    /// Power-up value of one cell in the cycle whose stream is `stream`.
    #[inline]
    pub(crate) fn cell_bit(&self, stream: CounterRng, index: usize) -> bool {
        let bias = self.biases[index];
        // u in [0, 1): bias 0 never fires, bias 1 always does.
        if bias <= 0.0 {
            false
        } else if bias >= 1.0 {
            true
        } else {
            stream.unit_at(index as u64) < bias
        }
    }

    /// One power-off/power-on cycle.
    pub fn power_up_read(&self, cycle_seed: u64) -> PowerUpSnapshot {
        let stream = self.read_stream(cycle_seed);
        let mut words = vec![0u64; self.cell_count().div_ceil(64)];
        for i in 0..self.cell_count() {
            if self.cell_bit(stream, i) {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        PowerUpSnapshot {
            words,
            cell_count: self.cell_count(),
            cycle_seed,
        }
    }
}

fn check_cell_count(cell_count: usize) -> Result<()> {
    if cell_count == 0 || cell_count > MAX_CELL_COUNT {
        return Err(Error::InvalidConfig("cell_count must lie in 1..=65536"));
    }
    Ok(())
}

/// The array contents observed right after one power-up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerUpSnapshot {
    words: Vec<u64>,
    cell_count: usize,
    cycle_seed: u64,
}

impl PowerUpSnapshot {
    /// Packs explicit bits; used by test rigs.
    pub fn from_bits(bits: &[bool], cycle_seed: u64) -> Self {
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
            words[i / 64] |= 1 << (i % 64);
        }
        Self {
            words,
            cell_count: bits.len(),
            cycle_seed,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn cycle_seed(&self) -> u64 {
        self.cycle_seed
    }

    pub fn read_bit(&self, address: u16) -> Result<bool> {
        let i = address as usize;
        if i >= self.cell_count {
            return Err(Error::AddressOutOfRange {
                address: i,
                cell_count: self.cell_count,
            });
        }
        Ok(self.bit(i))
    }

    #[inline]
    pub(crate) fn bit(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.cell_count).map(|i| self.bit(i))
    }
}
