// SPDX-License-Identifier: Apache-2.0

//! Ternary characterization of a device.
//!
//! The device is power-cycled `read_count` times (cycle seeds `base_seed`,
//! `base_seed + 1`, ...). A cell that returned the same value in every cycle
//! is stable; a single disagreement marks it fuzzy ("X").

use alloc::vec::Vec;

use crate::device::{SramPufDevice, MAX_CELL_COUNT};
use crate::error::{Error, Result};

pub const DEFAULT_READ_COUNT: u32 = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellState {
    Stable0,
    Stable1,
    /// The "X" mark.
    Fuzzy,
}

impl CellState {
    pub fn is_fuzzy(self) -> bool {
        self == CellState::Fuzzy
    }

    pub fn symbol(self) -> char {
        match self {
            CellState::Stable0 => '0',
            CellState::Stable1 => '1',
            CellState::Fuzzy => 'X',
        }
    }
}

/// Per-cell classification of an enrolled device.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TernaryMap {
    states: Vec<CellState>,
    read_count: u32,
    device_id: [u8; 16],
}

impl TernaryMap {
    pub fn from_states(
        states: Vec<CellState>,
        read_count: u32,
        device_id: [u8; 16],
    ) -> Result<Self> {
        if states.is_empty() || states.len() > MAX_CELL_COUNT {
            return Err(Error::InvalidConfig("cell_count must lie in 1..=65536"));
        }
        if read_count < 2 {
            return Err(Error::InvalidConfig("read_count must be at least 2"));
        }
        Ok(Self {
            states,
            read_count,
            device_id,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.states.len()
    }

    pub fn read_count(&self) -> u32 {
        self.read_count
    }

    pub fn device_id(&self) -> [u8; 16] {
        self.device_id
    }

    pub fn states(&self) -> &[CellState] {
        &self.states
    }

    pub fn state(&self, address: u16) -> Option<CellState> {
        self.states.get(address as usize).copied()
    }

    pub fn fuzzy_count(&self) -> usize {
        self.states.iter().filter(|s| s.is_fuzzy()).count()
    }

    /// SRAM PUF noise: fuzzy cells over all cells.
    pub fn puf_noise(&self) -> f64 {
        self.fuzzy_count() as f64 / self.cell_count() as f64
    }

    pub fn reference_bit(&self, address: u16) -> Result<bool> {
        match self.state(address) {
            Some(CellState::Stable0) => Ok(false),
            Some(CellState::Stable1) => Ok(true),
            Some(CellState::Fuzzy) => Err(Error::FuzzyCell { address }),
            None => Err(Error::AddressOutOfRange {
                address: address as usize,
                cell_count: self.cell_count(),
            }),
        }
    }
}

/// Classifies every cell of `device` from `read_count` power-up cycles.
pub fn enroll(device: &SramPufDevice, read_count: u32, base_seed: u64) -> Result<TernaryMap> {
    if read_count < 2 {
        return Err(Error::InvalidConfig("read_count must be at least 2"));
    }
    let streams: Vec<_> = (0..read_count as u64)
        .map(|r| device.read_stream(base_seed.wrapping_add(r)))
        .collect();
    let states = (0..device.cell_count())
        .map(|i| {
            let first = device.cell_bit(streams[0], i);
            // A bias of exactly 0 or 1 reads the same in every cycle.
            if device.is_degenerate(i) {
                return if first {
                    CellState::Stable1
                } else {
                    CellState::Stable0
                };
            }
            if streams[1..].iter().any(|&s| device.cell_bit(s, i) != first) {
                CellState::Fuzzy
            } else if first {
                CellState::Stable1
            } else {
                CellState::Stable0
            }
        })
        .collect();
    TernaryMap::from_states(states, read_count, device.device_id())
}
