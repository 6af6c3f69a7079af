// SPDX-License-Identifier: Apache-2.0

use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A model or pipeline parameter is outside its valid range.
    InvalidConfig(&'static str),
    AddressOutOfRange {
        address: usize,
        cell_count: usize,
    },
    /// A reference bit was requested for a cell marked "X".
    FuzzyCell {
        address: u16,
    },
    /// Every cell of the ternary map is fuzzy, so no address can be masked.
    Unmaskable,
    /// Responses may only be extracted from a masked address list.
    Unmasked,
    LengthMismatch {
        left: usize,
        right: usize,
    },
    AlreadyEnrolled,
    EmptyPassword,
    InvalidUserId {
        len: usize,
    },
    /// The ternary map does not belong to the device or vault it was paired with.
    MapMismatch,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::AddressOutOfRange {
                address,
                cell_count,
            } => write!(
                f,
                "address {address:#06X} out of range for {cell_count} cells"
            ),
            Error::FuzzyCell { address } => write!(f, "cell {address:04X} is fuzzy"),
            Error::Unmaskable => f.write_str("ternary map has no stable cell"),
            Error::Unmasked => f.write_str("address list has not been masked"),
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::AlreadyEnrolled => f.write_str("user already enrolled"),
            Error::EmptyPassword => f.write_str("password must not be empty"),
            Error::InvalidUserId { len } => {
                write!(f, "user id must be 1..=64 bytes, got {len}")
            }
            Error::MapMismatch => f.write_str("ternary map does not match"),
        }
    }
}

impl core::error::Error for Error {}
