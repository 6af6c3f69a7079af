// SPDX-License-Identifier: Apache-2.0

//! Ternary map file.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "PUF3"
//!      4     2  version (u16 LE, currently 1)
//!      6     4  cell_count (u32 LE, 1..=65536)
//!     10     4  read_count (u32 LE, >= 2)
//!     14    16  device_id
//!     30     *  states, 2 bits per cell, ceil(cell_count / 4) bytes
//! ```
//!
//! Cell `i` lives in byte `30 + i / 4` at bit offset `2 * (i % 4)` (the
//! first cell occupies the least significant bits). Codes: `00` Stable0,
//! `01` Stable1, `10` Fuzzy; `11` is invalid, as are nonzero padding bits.

use std::path::Path;

use ternpuf_core::{CellState, TernaryMap};

use crate::codec::{read_file, write_atomic, Cursor};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PUF3";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 30;

fn code(state: CellState) -> u8 {
    match state {
        CellState::Stable0 => 0b00,
        CellState::Stable1 => 0b01,
        CellState::Fuzzy => 0b10,
    }
}

pub fn encode(map: &TernaryMap) -> Vec<u8> {
    let n = map.cell_count();
    let mut out = Vec::with_capacity(HEADER_LEN + n.div_ceil(4));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&map.read_count().to_le_bytes());
    out.extend_from_slice(&map.device_id());
    for chunk in map.states().chunks(4) {
        let byte = chunk
            .iter()
            .enumerate()
            .fold(0u8, |acc, (k, &s)| acc | code(s) << (2 * k));
        out.push(byte);
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<TernaryMap> {
    let mut cur = Cursor::new(bytes);
    if cur.array::<4>("magic")? != *MAGIC {
        return Err(Error::format(0, "bad magic, expected PUF3"));
    }
    let version = cur.u16("version")?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            expected: VERSION,
        });
    }
    let n = cur.u32("cell_count")? as usize;
    if n == 0 || n > ternpuf_core::device::MAX_CELL_COUNT {
        return Err(Error::format(
            6,
            format!("cell_count {n} outside 1..=65536"),
        ));
    }
    let read_count = cur.u32("read_count")?;
    if read_count < 2 {
        return Err(Error::format(
            10,
            format!("read_count {read_count} below 2"),
        ));
    }
    let device_id = cur.array::<16>("device_id")?;
    let body_start = cur.pos();
    let body = cur.take(n.div_ceil(4), "state table")?;
    if cur.remaining() > 0 {
        return Err(Error::format(cur.pos(), "trailing bytes after state table"));
    }
    let mut states = Vec::with_capacity(n);
    for (b, &byte) in body.iter().enumerate() {
        for k in 0..4 {
            let i = 4 * b + k;
            let c = (byte >> (2 * k)) & 0b11;
            if i >= n {
                if c != 0 {
                    return Err(Error::format(body_start + b, "nonzero padding bits"));
                }
                continue;
            }
            states.push(match c {
                0b00 => CellState::Stable0,
                0b01 => CellState::Stable1,
                0b10 => CellState::Fuzzy,
                _ => {
                    return Err(Error::format(
                        body_start + b,
                        format!("invalid state code 11 for cell {i}"),
                    ))
                }
            });
        }
    }
    Ok(TernaryMap::from_states(states, read_count, device_id)?)
}

pub fn write(path: &Path, map: &TernaryMap) -> Result<()> {
    write_atomic(path, &encode(map))
}

pub fn read(path: &Path) -> Result<TernaryMap> {
    decode(&read_file(path)?)
}
