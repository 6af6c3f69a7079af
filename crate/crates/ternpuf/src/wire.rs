// SPDX-License-Identifier: Apache-2.0

//! Line-oriented TCP authentication service.
//!
//! Requests, one per LF-terminated line, fields separated by spaces:
//!
//! ```text
//! PING
//! NOISE
//! ENROLL <user_id> <password>
//! AUTH <user_id> <password>
//! ```
//!
//! Fields are printable ASCII; `%XX` encodes any other byte (including space
//! and `%` itself). Every request line gets exactly one reply line:
//! `OK [detail]`, `FAIL`, or `ERR <reason>`. Nothing is encrypted.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::thread;
use std::time::{SystemTime, UNIX_EPOCH};

use ternpuf_core::{ApgConfig, SramPufDevice, TernaryMap, Vault};

use crate::error::{Error, Result};
use crate::vault_file;

/// Longest accepted request line, terminator excluded.
pub const MAX_LINE: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WireRequest {
    Ping,
    Noise,
    Enroll { user_id: Vec<u8>, password: Vec<u8> },
    Auth { user_id: Vec<u8>, password: Vec<u8> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Fail,
    Err,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireResponse {
    pub status: Status,
    pub detail: Option<String>,
}

impl WireResponse {
    pub fn ok() -> Self {
        Self {
            status: Status::Ok,
            detail: None,
        }
    }

    pub fn fail() -> Self {
        Self {
            status: Status::Fail,
            detail: None,
        }
    }

    pub fn err(reason: &str) -> Self {
        Self {
            status: Status::Err,
            detail: Some(reason.to_string()),
        }
    }

    /// The reply line without its LF. Detail text is reduced to printable
    /// ASCII so a reply can never span lines.
    pub fn to_line(&self) -> String {
        let mut s = String::from(match self.status {
            Status::Ok => "OK",
            Status::Fail => "FAIL",
            Status::Err => "ERR",
        });
        if let Some(d) = &self.detail {
            s.push(' ');
            s.extend(d.chars().map(|c| {
                if c == ' ' || c.is_ascii_graphic() {
                    c
                } else {
                    '?'
                }
            }));
        }
        s
    }

    pub fn parse(line: &str) -> Option<Self> {
        let (head, detail) = match line.split_once(' ') {
            Some((h, d)) => (h, Some(d.to_string())),
            None => (line, None),
        };
        let status = match head {
            "OK" => Status::Ok,
            "FAIL" => Status::Fail,
            "ERR" => Status::Err,
            _ => return None,
        };
        Some(Self { status, detail })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseError;

fn unescape(field: &[u8]) -> std::result::Result<Vec<u8>, ParseError> {
    let mut out = Vec::with_capacity(field.len());
    let mut i = 0;
    while i < field.len() {
        let b = field[i];
        if !b.is_ascii_graphic() {
            return Err(ParseError);
        }
        if b == b'%' {
            let hex = field.get(i + 1..i + 3).ok_or(ParseError)?;
            let hex = std::str::from_utf8(hex).map_err(|_| ParseError)?;
            out.push(u8::from_str_radix(hex, 16).map_err(|_| ParseError)?);
            i += 3;
        } else {
            out.push(b);
            i += 1;
        }
    }
    Ok(out)
}

/// Escapes a field for a request line.
pub fn escape(field: &[u8]) -> String {
    let mut s = String::with_capacity(field.len());
    for &b in field {
        if b.is_ascii_graphic() && b != b'%' {
            s.push(b as char);
        } else {
            s.push_str(&format!("%{b:02X}"));
        }
    }
    s
}

impl WireRequest {
    /// Parses one line; a trailing CR is tolerated.
    pub fn parse(line: &[u8]) -> std::result::Result<Self, ParseError> {
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        let fields: Vec<&[u8]> = line
            .split(|&b| b == b' ')
            .filter(|f| !f.is_empty())
            .collect();
        match fields.as_slice() {
            [b"PING"] => Ok(WireRequest::Ping),
            [b"NOISE"] => Ok(WireRequest::Noise),
            [verb, id, pw] if *verb == b"ENROLL" || *verb == b"AUTH" => {
                let user_id = unescape(id)?;
                let password = unescape(pw)?;
                Ok(if *verb == b"ENROLL" {
                    WireRequest::Enroll { user_id, password }
                } else {
                    WireRequest::Auth { user_id, password }
                })
            }
            _ => Err(ParseError),
        }
    }

    pub fn to_line(&self) -> String {
        match self {
            WireRequest::Ping => "PING".into(),
            WireRequest::Noise => "NOISE".into(),
            WireRequest::Enroll { user_id, password } => {
                format!("ENROLL {} {}", escape(user_id), escape(password))
            }
            WireRequest::Auth { user_id, password } => {
                format!("AUTH {} {}", escape(user_id), escape(password))
            }
        }
    }
}

struct Power {
    device: SramPufDevice,
    next_cycle: u64,
}

/// Shared state behind every connection.
pub struct Service {
    config: ApgConfig,
    map: TernaryMap,
    power: Mutex<Power>,
    vault: RwLock<Vault>,
    vault_path: Option<PathBuf>,
}

impl Service {
    /// `first_cycle` seeds the first AUTH power-up; each later AUTH uses the
    /// next integer. With `vault_path` set, every ENROLL is persisted before
    /// it is acknowledged.
    pub fn new(
        config: ApgConfig,
        device: SramPufDevice,
        map: TernaryMap,
        vault: Vault,
        first_cycle: u64,
        vault_path: Option<PathBuf>,
    ) -> Result<Self> {
        if device.device_id() != map.device_id() || vault.map_id() != map.device_id() {
            return Err(ternpuf_core::Error::MapMismatch.into());
        }
        Ok(Self {
            config,
            map,
            power: Mutex::new(Power {
                device,
                next_cycle: first_cycle,
            }),
            vault: RwLock::new(vault),
            vault_path,
        })
    }

    pub fn vault_len(&self) -> usize {
        self.vault.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn handle(&self, request: &WireRequest) -> WireResponse {
        match request {
            WireRequest::Ping => WireResponse::ok(),
            WireRequest::Noise => WireResponse {
                status: Status::Ok,
                detail: Some(format!("{:.6}", self.map.puf_noise())),
            },
            WireRequest::Enroll { user_id, password } => self.enroll(user_id, password),
            WireRequest::Auth { user_id, password } => self.auth(user_id, password),
        }
    }

    pub fn handle_line(&self, line: &[u8]) -> WireResponse {
        match WireRequest::parse(line) {
            Ok(req) => self.handle(&req),
            Err(ParseError) => WireResponse::err("parse"),
        }
    }

    fn enroll(&self, user_id: &[u8], password: &[u8]) -> WireResponse {
        let mut vault = self.vault.write().unwrap_or_else(|e| e.into_inner());
        let mut next = vault.clone();
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        if let Err(e) = next.enroll_user(&self.config, user_id, password, &self.map, now) {
            return core_err(&e);
        }
        if let Some(path) = &self.vault_path {
            if vault_file::save(path, &next).is_err() {
                return WireResponse::err("storage");
            }
        }
        *vault = next;
        WireResponse::ok()
    }

    fn auth(&self, user_id: &[u8], password: &[u8]) -> WireResponse {
        let snapshot = {
            let mut power = self.power.lock().unwrap_or_else(|e| e.into_inner());
            let seed = power.next_cycle;
            power.next_cycle = seed.wrapping_add(1);
            power.device.power_up_read(seed)
        };
        let vault = self.vault.read().unwrap_or_else(|e| e.into_inner());
        match vault.verify(&self.config, user_id, password, &self.map, &snapshot) {
            Ok(o) if o.is_accept() => WireResponse::ok(),
            Ok(_) => WireResponse::fail(),
            Err(e) => core_err(&e),
        }
    }
}

fn core_err(e: &ternpuf_core::Error) -> WireResponse {
    use ternpuf_core::Error as E;
    WireResponse::err(match e {
        E::AlreadyEnrolled => "exists",
        E::EmptyPassword => "empty-password",
        E::InvalidUserId { .. } => "bad-user-id",
        E::MapMismatch => "map-mismatch",
        _ => "internal",
    })
}

/// Reads one request line of at most `limit` bytes. Returns `None` at end of
/// stream; an overlong line is drained to its LF and reported as `Err`.
fn next_line<R: BufRead>(
    reader: &mut R,
    buf: &mut Vec<u8>,
    limit: usize,
) -> io::Result<Option<std::result::Result<(), ParseError>>> {
    buf.clear();
    let n = reader
        .by_ref()
        .take(limit as u64 + 1)
        .read_until(b'\n', buf)?;
    if n == 0 {
        return Ok(None);
    }
    if buf.last() == Some(&b'\n') {
        buf.pop();
        return Ok(Some(Ok(())));
    }
    if buf.len() <= limit {
        // final line without LF
        return Ok(Some(Ok(())));
    }
    let mut sink = Vec::new();
    loop {
        sink.clear();
        let n = reader
            .by_ref()
            .take(limit as u64)
            .read_until(b'\n', &mut sink)?;
        if n == 0 || sink.last() == Some(&b'\n') {
            break;
        }
    }
    Ok(Some(Err(ParseError)))
}

/// Answers every line from `reader` on `writer` until end of stream.
pub fn serve_lines<R: BufRead, W: Write>(
    service: &Service,
    mut reader: R,
    mut writer: W,
) -> io::Result<()> {
    let mut line = Vec::new();
    while let Some(read) = next_line(&mut reader, &mut line, MAX_LINE)? {
        let reply = match read {
            Ok(()) => service.handle_line(&line),
            Err(ParseError) => WireResponse::err("parse"),
        };
        writer.write_all(reply.to_line().as_bytes())?;
        writer.write_all(b"\n")?;
        writer.flush()?;
    }
    Ok(())
}

pub fn serve_connection(service: &Service, stream: TcpStream) -> io::Result<()> {
    let reader = BufReader::new(stream.try_clone()?);
    serve_lines(service, reader, stream)
}

pub fn bind(addr: &str) -> Result<TcpListener> {
    TcpListener::bind(addr).map_err(|source| Error::Bind {
        addr: addr.to_string(),
        source,
    })
}

/// Accepts connections forever, one thread each.
pub fn serve(service: Arc<Service>, listener: TcpListener) -> Result<()> {
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(_) => continue,
        };
        let service = Arc::clone(&service);
        thread::spawn(move || {
            let _ = serve_connection(&service, stream);
        });
    }
    Ok(())
}
