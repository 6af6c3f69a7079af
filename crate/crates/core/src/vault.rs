// SPDX-License-Identifier: Apache-2.0

//! Credential store on top of the PUF pipeline.
//!
//! A record keeps only SHA-256 of the 16-byte (MSB-first) enrollment-time
//! response. Neither the password nor the response nor the addresses are
//! stored.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::apg::{generate_response, hash_sha256, ApgConfig, ExpanderVariant, PufResponse};
use crate::device::{PowerUpSnapshot, SramPufDevice};
use crate::enrollment::TernaryMap;
use crate::error::{Error, Result};

pub const MAX_USER_ID_LEN: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserRecord {
    pub user_id: Vec<u8>,
    pub response_digest: [u8; 32],
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub expander_variant: ExpanderVariant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuthOutcome {
    Accept,
    Reject,
}

impl AuthOutcome {
    pub fn is_accept(self) -> bool {
        self == AuthOutcome::Accept
    }
}

pub fn response_digest(response: &PufResponse) -> [u8; 32] {
    hash_sha256(&response.to_bytes()).0
}

/// Compares without early exit.
pub fn constant_time_eq(a: &[u8; 32], b: &[u8; 32]) -> bool {
    let diff = a
        .iter()
        .zip(b.iter())
        .fold(0u8, |acc, (x, y)| acc | core::hint::black_box(x ^ y));
    core::hint::black_box(diff) == 0
}

fn check_user_id(user_id: &[u8]) -> Result<()> {
    if user_id.is_empty() || user_id.len() > MAX_USER_ID_LEN {
        return Err(Error::InvalidUserId { len: user_id.len() });
    }
    Ok(())
}

/// Records bound to a single enrolled ternary map, identified by its device id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vault {
    map_id: [u8; 16],
    records: BTreeMap<Vec<u8>, UserRecord>,
}

impl Vault {
    pub fn new(map_id: [u8; 16]) -> Self {
        Self {
            map_id,
            records: BTreeMap::new(),
        }
    }

    pub fn from_records(
        map_id: [u8; 16],
        records: impl IntoIterator<Item = UserRecord>,
    ) -> Result<Self> {
        let mut vault = Self::new(map_id);
        for r in records {
            check_user_id(&r.user_id)?;
            if vault.records.contains_key(&r.user_id) {
                return Err(Error::AlreadyEnrolled);
            }
            vault.records.insert(r.user_id.clone(), r);
        }
        Ok(vault)
    }

    pub fn map_id(&self) -> [u8; 16] {
        self.map_id
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, user_id: &[u8]) -> Option<&UserRecord> {
        self.records.get(user_id)
    }

    /// Records in user-id order.
    pub fn records(&self) -> impl ExactSizeIterator<Item = &UserRecord> {
        self.records.values()
    }

    fn check_map(&self, map: &TernaryMap) -> Result<()> {
        if map.device_id() != self.map_id {
            return Err(Error::MapMismatch);
        }
        Ok(())
    }

    /// Registers a user from the enrollment-time (map-sourced) response.
    pub fn enroll_user(
        &mut self,
        config: &ApgConfig,
        user_id: &[u8],
        password: &[u8],
        map: &TernaryMap,
        created_at: u64,
    ) -> Result<&UserRecord> {
        check_user_id(user_id)?;
        if password.is_empty() {
            return Err(Error::EmptyPassword);
        }
        self.check_map(map)?;
        if self.records.contains_key(user_id) {
            return Err(Error::AlreadyEnrolled);
        }
        let response = generate_response(config, user_id, password, map, map)?;
        let record = UserRecord {
            user_id: user_id.to_vec(),
            response_digest: response_digest(&response),
            created_at,
            expander_variant: config.expander,
        };
        Ok(self.records.entry(user_id.to_vec()).or_insert(record))
    }

    /// Power-cycles `device` once and checks the credentials against it.
    pub fn authenticate(
        &self,
        config: &ApgConfig,
        user_id: &[u8],
        password: &[u8],
        device: &SramPufDevice,
        map: &TernaryMap,
        cycle_seed: u64,
    ) -> Result<AuthOutcome> {
        if device.device_id() != map.device_id() {
            return Err(Error::MapMismatch);
        }
        let snapshot = device.power_up_read(cycle_seed);
        self.verify(config, user_id, password, map, &snapshot)
    }

    /// Checks credentials against an already acquired snapshot.
    ///
    /// Unknown users run the same pipeline against a dummy record so the
    /// reject path does the same work as a wrong password.
    pub fn verify(
        &self,
        config: &ApgConfig,
        user_id: &[u8],
        password: &[u8],
        map: &TernaryMap,
        snapshot: &PowerUpSnapshot,
    ) -> Result<AuthOutcome> {
        self.check_map(map)?;
        let (known, expected, variant) = match self.records.get(user_id) {
            Some(r) => (true, r.response_digest, r.expander_variant),
            None => (false, [0u8; 32], config.expander),
        };
        let cfg = config.with_expander(variant);
        let response = generate_response(&cfg, user_id, password, map, snapshot)?;
        let matches = constant_time_eq(&response_digest(&response), &expected);
        Ok(if known & matches {
            AuthOutcome::Accept
        } else {
            AuthOutcome::Reject
        })
    }
}
