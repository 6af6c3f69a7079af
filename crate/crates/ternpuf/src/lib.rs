// SPDX-License-Identifier: Apache-2.0

//! File formats, terminal session, TCP service and CLI around `ternpuf-core`.

pub mod cli;
mod codec;
pub mod device_spec;
pub mod error;
pub mod map_file;
pub mod report_csv;
pub mod session;
pub mod vault_file;
pub mod wire;

pub use device_spec::DeviceSpec;
pub use error::{Error, Result};
