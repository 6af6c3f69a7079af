// SPDX-License-Identifier: Apache-2.0

//! Terminal and golden-file text formats.
//!
//! * byte strings: uppercase hex pairs separated by single spaces
//! * entered fields: the same, prefixed by `0X` with no space
//! * addresses: 4-digit uppercase hex groups, 16 per line
//! * responses: unspaced `0`/`1` string

use alloc::string::String;
use core::fmt::Write;

use crate::apg::{AddressList, LongDigest, MessageDigest, PipelineTrace, EXPANDER_ROUNDS};

pub const ADDRESSES_PER_ROW: usize = 16;

pub const SHIFT_TITLE: &str = "Results of Shifting Message Digest:";
pub const MD_TITLE: &str = "8 MD results:";
pub const ADDRESS_TITLE: &str = "128 Addresses for extracting PUF Response:";
pub const RESPONSE_TITLE: &str = "128bit PUF Response:";

pub fn hex_bytes(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 3);
    for (i, b) in bytes.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{b:02X}");
    }
    s
}

/// `0X` followed by the bytes, e.g. `0X31 2D 4D`; an empty field is just `0X`.
pub fn entered_hex(bytes: &[u8]) -> String {
    let mut s = String::from("0X");
    s.push_str(&hex_bytes(bytes));
    s
}

/// Address rows, each terminated by a newline.
pub fn address_block(list: &AddressList) -> String {
    let mut s = String::new();
    for row in list.addresses().chunks(ADDRESSES_PER_ROW) {
        for (i, a) in row.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{a:04X}");
        }
        s.push('\n');
    }
    s
}

/// The four titled blocks: rotations, digests, masked addresses, response.
pub fn trace_blocks(trace: &PipelineTrace) -> String {
    let mut s = expander_blocks(&trace.variants, &trace.long);
    s.push('\n');
    s.push_str(ADDRESS_TITLE);
    s.push('\n');
    s.push_str(&address_block(&trace.masked));
    s.push('\n');
    s.push_str(RESPONSE_TITLE);
    s.push('\n');
    let _ = writeln!(s, "{}", trace.response);
    s
}

/// Rotation and digest blocks only.
pub fn expander_blocks(variants: &[MessageDigest; EXPANDER_ROUNDS], long: &LongDigest) -> String {
    let mut s = String::new();
    s.push_str(SHIFT_TITLE);
    s.push('\n');
    for v in variants {
        s.push_str(&hex_bytes(v.as_bytes()));
        s.push('\n');
    }
    s.push('\n');
    s.push_str(MD_TITLE);
    s.push('\n');
    for (i, md) in long.blocks().enumerate() {
        let _ = writeln!(s, "MD{}: {}", i + 1, hex_bytes(md.as_bytes()));
    }
    s
}
