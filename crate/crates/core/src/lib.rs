// SPDX-License-Identifier: Apache-2.0

//! Ternary SRAM-PUF password generation.
//!
//! * [`device`]: seedable statistical model of SRAM power-up values
//! * [`enrollment`]: repeated power cycling into a Stable0/Stable1/Fuzzy map
//! * [`apg`]: credentials to 128 masked cell addresses to a 128-bit response
//! * [`vault`]: user records holding a digest of the enrollment response
//! * [`metrics`]: noise, reproducibility and uniqueness statistics
//! * [`render`]: hex and bit-string text formats
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]

extern crate alloc;

pub mod apg;
pub mod device;
pub mod enrollment;
mod error;
pub mod metrics;
pub mod render;
pub mod rng;
pub mod vault;

pub use apg::{
    AddressList, ApgConfig, BitSource, Endianness, ExpanderVariant, HashInput, LongDigest,
    MessageDigest, PufResponse,
};
pub use device::{BiasModel, PowerUpSnapshot, SramPufDevice};
pub use enrollment::{enroll, CellState, TernaryMap};
pub use error::{Error, Result};
pub use vault::{AuthOutcome, UserRecord, Vault};
