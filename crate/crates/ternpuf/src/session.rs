// SPDX-License-Identifier: Apache-2.0

//! Interactive terminal mode: prompt, echo, hex dump, optional trace.

use std::io::{self, Read, Write};

use ternpuf_core::apg::{expand, rotated_variants, PipelineTrace};
use ternpuf_core::render::{entered_hex, expander_blocks, trace_blocks};
use ternpuf_core::{ApgConfig, PowerUpSnapshot, TernaryMap};

use crate::error::{Error, Result};

pub const DEFAULT_MSG_SIZE: usize = 64;

pub struct SessionConfig<'a> {
    /// Receive buffer size, counting the terminator slot.
    pub msg_size: usize,
    pub verbose: bool,
    pub apg: ApgConfig,
    /// Needed for the address and response blocks.
    pub map: Option<&'a TernaryMap>,
    /// Bit source for the response; the map's reference bits when absent.
    pub snapshot: Option<&'a PowerUpSnapshot>,
}

impl Default for SessionConfig<'_> {
    fn default() -> Self {
        Self {
            msg_size: DEFAULT_MSG_SIZE,
            verbose: false,
            apg: ApgConfig::default(),
            map: None,
            snapshot: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionOutcome {
    pub user_id: Vec<u8>,
    pub password: Vec<u8>,
    pub trace: Option<PipelineTrace>,
}

/// Reads one field like a microcontroller receive loop: store and echo bytes
/// until a CR or LF has been stored or the buffer is full, then drop the last
/// stored byte. A full buffer therefore loses its final character, and the LF
/// of a CRLF pair is left in the stream to start the next field.
pub fn read_field<R: Read + ?Sized, W: Write + ?Sized>(
    input: &mut R,
    output: &mut W,
    msg_size: usize,
    field: &'static str,
) -> Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(msg_size);
    let mut recv = 0u8;
    while recv != b'\n' && recv != b'\r' && buf.len() < msg_size {
        let mut byte = [0u8; 1];
        match input.read_exact(&mut byte) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
                return Err(Error::Aborted { field })
            }
            Err(e) => return Err(e.into()),
        }
        recv = byte[0];
        output.write_all(&byte)?;
        output.flush()?;
        buf.push(recv);
    }
    buf.pop();
    Ok(buf)
}

pub fn interactive_session<R: Read + ?Sized, W: Write + ?Sized>(
    input: &mut R,
    output: &mut W,
    config: &SessionConfig<'_>,
) -> Result<SessionOutcome> {
    if config.msg_size == 0 {
        return Err(ternpuf_core::Error::InvalidConfig("msg_size must be at least 1").into());
    }
    output.write_all(b"Enter your ID\n")?;
    output.flush()?;
    let user_id = read_field(input, output, config.msg_size, "ID")?;
    output.write_all(b"\nEnter your Password\n")?;
    output.flush()?;
    let password = read_field(input, output, config.msg_size, "password")?;
    write!(
        output,
        "\nEntered ID:\n{}\nEntered Password:\n{}\n",
        entered_hex(&user_id),
        entered_hex(&password)
    )?;

    let mut trace = None;
    if config.verbose {
        output.write_all(b"\n")?;
        match config.map {
            Some(map) => {
                let t = match config.snapshot {
                    Some(snap) => config.apg.trace(&user_id, &password, map, snap)?,
                    None => config.apg.trace(&user_id, &password, map, map)?,
                };
                output.write_all(trace_blocks(&t).as_bytes())?;
                trace = Some(t);
            }
            None => {
                let digest = config.apg.credential_digest(&user_id, &password);
                let long = expand(&digest, config.apg.expander);
                output.write_all(expander_blocks(&rotated_variants(&digest), &long).as_bytes())?;
            }
        }
    }
    output.flush()?;
    Ok(SessionOutcome {
        user_id,
        password,
        trace,
    })
}
